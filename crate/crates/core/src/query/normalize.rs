//! Disjunctive normal form over lower-bound atoms.
//!
//! Negations are pushed onto predicates, upper bounds become lower bounds
//! on the declared complement (`Pr(φ) ≤ r` iff `Pr(φ̄) ≥ 1 − r`), `=` and
//! `≠` are expanded, and the result is multiplied out. Every disjunct is a
//! conjunction of `Pr(φ) ≥ r` / `Pr(φ) > r` with one atom per property.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::Rational;
use crate::oracle::validate::{Claim, Comparator};
use crate::query::parse::{Predicate, Query};

/// Default bound on the number of disjuncts.
pub const DEFAULT_DNF_CAP: usize = 4096;

/// `Pr(property) ≥ value`, or `>` when `strict`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LowerBound {
    pub property: String,
    pub value: Rational,
    pub strict: bool,
}

impl LowerBound {
    pub fn claim(&self) -> Claim {
        Claim::new(if self.strict { Comparator::Gt } else { Comparator::Ge }, self.value.clone())
    }

    fn trivially_true(&self) -> bool {
        !self.strict && self.value.is_zero()
    }

    fn trivially_false(&self) -> bool {
        self.value > Rational::one() || (self.strict && self.value.is_one())
    }

    /// Whether `self` implies `other` (same property).
    fn implies(&self, other: &LowerBound) -> bool {
        self.value > other.value || (self.value == other.value && (self.strict || !other.strict))
    }
}

/// A conjunction of lower bounds, at most one per property, in order of
/// first mention.
pub type Conjunct = Vec<LowerBound>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct NormalizedQuery {
    pub disjuncts: Vec<Conjunct>,
    /// Complement properties introduced by upper bounds.
    pub complements_needed: BTreeSet<String>,
}

impl NormalizedQuery {
    /// Whether the query is equivalent to `false`.
    pub fn is_unsatisfiable(&self) -> bool {
        self.disjuncts.is_empty()
    }
}

/// Symmetric complement lookup.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Complements {
    map: BTreeMap<String, String>,
}

impl Complements {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares `b` as the complement of `a` (and vice versa).
    pub fn declare(&mut self, a: &str, b: &str) -> &mut Self {
        self.map.insert(a.into(), b.into());
        self.map.insert(b.into(), a.into());
        self
    }

    pub fn of(&self, name: &str) -> Option<&str> {
        self.map.get(name).map(String::as_str)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.map.iter().filter(|(a, b)| a < b).map(|(a, b)| (a.as_str(), b.as_str()))
    }
}

/// Positive boolean structure over atoms.
enum Formula {
    Atom(LowerBound),
    True,
    False,
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

fn negate(cmp: Comparator) -> Comparator {
    match cmp {
        Comparator::Ge => Comparator::Lt,
        Comparator::Gt => Comparator::Le,
        Comparator::Le => Comparator::Gt,
        Comparator::Lt => Comparator::Ge,
        Comparator::Eq => Comparator::Ne,
        Comparator::Ne => Comparator::Eq,
    }
}

struct Normalizer<'a> {
    complements: &'a Complements,
    needed: BTreeSet<String>,
}

impl Normalizer<'_> {
    fn formula(&mut self, q: &Query, positive: bool) -> Result<Formula> {
        Ok(match q {
            Query::Pred(p) => {
                let cmp = if positive { p.cmp } else { negate(p.cmp) };
                self.literal(p, cmp)?
            }
            Query::Not(q) => self.formula(q, !positive)?,
            Query::And(qs) | Query::Or(qs) => {
                let parts = qs.iter().map(|q| self.formula(q, positive)).collect::<Result<Vec<_>>>()?;
                if matches!(q, Query::And(_)) == positive {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
        })
    }

    fn atom(&self, property: &str, value: Rational, strict: bool) -> Formula {
        let a = LowerBound { property: property.into(), value, strict };
        if a.trivially_true() {
            Formula::True
        } else if a.trivially_false() {
            Formula::False
        } else {
            Formula::Atom(a)
        }
    }

    /// `Pr(φ) ≤ r` (or `< r`) as a bound on the complement.
    fn upper(&mut self, property: &str, r: &Rational, strict: bool) -> Result<Formula> {
        // Pr ≤ 1 always holds and Pr < 0 never does, complement or not
        if !strict && r.is_one() {
            return Ok(Formula::True);
        }
        if strict && r.is_zero() {
            return Ok(Formula::False);
        }
        let c = self
            .complements
            .of(property)
            .ok_or_else(|| Error::MissingComplement(property.into()))?
            .to_string();
        self.needed.insert(c.clone());
        Ok(self.atom(&c, Rational::one() - r, strict))
    }

    fn literal(&mut self, p: &Predicate, cmp: Comparator) -> Result<Formula> {
        let (name, r) = (p.property.as_str(), &p.bound);
        Ok(match cmp {
            Comparator::Ge => self.atom(name, r.clone(), false),
            Comparator::Gt => self.atom(name, r.clone(), true),
            Comparator::Le => self.upper(name, r, false)?,
            Comparator::Lt => self.upper(name, r, true)?,
            Comparator::Eq => Formula::And(vec![self.atom(name, r.clone(), false), self.upper(name, r, false)?]),
            Comparator::Ne => Formula::Or(vec![self.upper(name, r, true)?, self.atom(name, r.clone(), true)]),
        })
    }
}

/// Adds `atom`, keeping the stronger bound when the property already occurs.
fn conjoin(c: &mut Conjunct, atom: &LowerBound) {
    match c.iter_mut().find(|a| a.property == atom.property) {
        Some(a) => {
            if atom.implies(a) {
                *a = atom.clone();
            }
        }
        None => c.push(atom.clone()),
    }
}

fn dnf(f: &Formula, cap: usize) -> Result<Vec<Conjunct>> {
    let too_many = || Error::CapExceeded { what: "DNF disjuncts".into(), limit: cap as u64 };
    Ok(match f {
        Formula::True => vec![Vec::new()],
        Formula::False => Vec::new(),
        Formula::Atom(a) => vec![vec![a.clone()]],
        Formula::Or(parts) => {
            let mut out = Vec::new();
            for p in parts {
                out.extend(dnf(p, cap)?);
                if out.len() > cap {
                    return Err(too_many());
                }
            }
            out
        }
        Formula::And(parts) => {
            let mut acc: Vec<Conjunct> = vec![Vec::new()];
            for p in parts {
                let right = dnf(p, cap)?;
                if acc.len().saturating_mul(right.len()) > cap {
                    return Err(too_many());
                }
                let mut next = Vec::with_capacity(acc.len() * right.len());
                for l in &acc {
                    for r in &right {
                        let mut c = l.clone();
                        r.iter().for_each(|a| conjoin(&mut c, a));
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

/// Normalizes `q` into at most `cap` disjuncts.
pub fn normalize(q: &Query, complements: &Complements, cap: usize) -> Result<NormalizedQuery> {
    let mut n = Normalizer { complements, needed: BTreeSet::new() };
    let f = n.formula(q, true)?;
    let mut disjuncts: Vec<Conjunct> = Vec::new();
    for d in dnf(&f, cap)? {
        if !disjuncts.contains(&d) {
            disjuncts.push(d);
        }
    }
    Ok(NormalizedQuery { disjuncts, complements_needed: n.needed })
}

/// Normal form of `¬q`, used for universally quantified queries.
pub fn normalize_negated(q: &Query, complements: &Complements, cap: usize) -> Result<NormalizedQuery> {
    normalize(&Query::Not(Box::new(q.clone())), complements, cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};
    use crate::query::parse::parse_query;

    fn lb(p: &str, v: Rational, strict: bool) -> LowerBound {
        LowerBound { property: p.into(), value: v, strict }
    }

    fn norm(text: &str, c: &Complements) -> Result<NormalizedQuery> {
        normalize(&parse_query(text).unwrap(), c, DEFAULT_DNF_CAP)
    }

    #[test]
    fn disjunction_of_singletons() {
        let n = norm("Pr(a) >= 1/2 | Pr(b) > 1/4", &Complements::new()).unwrap();
        assert_eq!(n.disjuncts, vec![vec![lb("a", rat(1, 2), false)], vec![lb("b", rat(1, 4), true)]]);
        assert!(n.complements_needed.is_empty());
    }

    #[test]
    fn negation_pushdown() {
        let n = norm("!(Pr(a) < 1/2)", &Complements::new()).unwrap();
        assert_eq!(n.disjuncts, vec![vec![lb("a", rat(1, 2), false)]]);
        let c = Complements::new();
        assert!(matches!(norm("!(Pr(a) >= 1/2)", &c), Err(Error::MissingComplement(p)) if p == "a"));
    }

    #[test]
    fn upper_bounds_use_the_complement() {
        let mut c = Complements::new();
        c.declare("a", "abar");
        let n = norm("Pr(a) <= 1/3", &c).unwrap();
        assert_eq!(n.disjuncts, vec![vec![lb("abar", rat(2, 3), false)]]);
        assert_eq!(n.complements_needed, BTreeSet::from(["abar".to_string()]));
        // symmetric binding
        let n = norm("Pr(abar) < 1/4", &c).unwrap();
        assert_eq!(n.disjuncts, vec![vec![lb("a", rat(3, 4), true)]]);
    }

    #[test]
    fn equality_and_inequality_expand() {
        let mut c = Complements::new();
        c.declare("a", "na");
        let n = norm("Pr(a) = 1/2", &c).unwrap();
        assert_eq!(n.disjuncts, vec![vec![lb("a", rat(1, 2), false), lb("na", rat(1, 2), false)]]);
        let n = norm("Pr(a) != 1/2", &c).unwrap();
        assert_eq!(n.disjuncts, vec![vec![lb("na", rat(1, 2), true)], vec![lb("a", rat(1, 2), true)]]);
    }

    #[test]
    fn trivial_atoms_simplify() {
        let c = Complements::new();
        let n = norm("Pr(a) >= 0 & Pr(b) <= 1", &c).unwrap();
        assert_eq!(n.disjuncts, vec![Vec::<LowerBound>::new()]);
        let n = norm("Pr(a) > 1 | Pr(b) < 0", &c).unwrap();
        assert!(n.is_unsatisfiable());
    }

    #[test]
    fn atoms_on_one_property_merge() {
        let n = norm("Pr(a) >= 1/2 & Pr(a) > 1/2 & Pr(a) >= 1/3", &Complements::new()).unwrap();
        assert_eq!(n.disjuncts, vec![vec![lb("a", rat(1, 2), true)]]);
    }

    #[test]
    fn distribution_and_cap() {
        let n = norm("(Pr(a) >= 1/2 | Pr(b) >= 1/2) & (Pr(c) > 0 | Pr(d) = 1)", &Complements::new()).unwrap();
        assert_eq!(n.disjuncts.len(), 4);
        assert_eq!(n.disjuncts[3], vec![lb("b", rat(1, 2), false), lb("d", int(1), false)]);
        // 2^13 disjuncts
        let text = (0..13).map(|i| format!("(Pr(x{i}) >= 1/2 | Pr(y{i}) >= 1/2)")).collect::<Vec<_>>().join(" & ");
        assert!(matches!(norm(&text, &Complements::new()), Err(Error::CapExceeded { .. })));
    }
}
