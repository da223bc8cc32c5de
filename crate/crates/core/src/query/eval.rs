//! Query evaluation: each disjunct of the normal form is an extended
//! achievability question, answered by the qualitative procedure when every
//! bound is `≥ 1` or `> 0`, and by the LP otherwise.

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::mdp::Mdp;
use crate::model::strategy::Strategy;
use crate::num::Rational;
use crate::objectives::{Problem, Property, RouteChoice};
use crate::oracle::validate::{validate_strategy, Claim, ValidationReport};
use crate::qualitative::{decide_qualitative, QualitativeQuery};
use crate::query::normalize::{normalize, Complements, Conjunct, NormalizedQuery, DEFAULT_DNF_CAP};
use crate::query::parse::Query;

/// Named properties with optional complement bindings.
#[derive(Clone, Debug, Default)]
pub struct PropertyTable {
    names: Vec<String>,
    props: Vec<Property>,
    pub complements: Complements,
}

impl PropertyTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, p: Property) -> Result<&mut Self> {
        if self.names.iter().any(|n| n == name) {
            return Err(Error::invalid(format!("property {name:?} is declared twice")));
        }
        self.names.push(name.into());
        self.props.push(p);
        Ok(self)
    }

    /// Binds `b` as the complement of `a`; both must be declared.
    pub fn complement(&mut self, a: &str, b: &str) -> Result<&mut Self> {
        self.get(a)?;
        self.get(b)?;
        self.complements.declare(a, b);
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Result<&Property> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.props[i])
            .ok_or_else(|| Error::unknown("property", name))
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }
}

#[derive(Clone, Debug)]
pub struct EvalOptions {
    pub dnf_cap: usize,
    pub route: RouteChoice,
    /// Send `≥ 1` / `> 0` disjuncts to the qualitative procedure.
    pub qualitative: bool,
    /// Re-validate every witness on the induced chain.
    pub self_check: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            dnf_cap: DEFAULT_DNF_CAP,
            route: RouteChoice::Auto,
            qualitative: true,
            self_check: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    /// The disjunct has no constraints left.
    Trivial,
    Qualitative,
    Quantitative,
}

#[derive(Clone, Debug)]
pub struct Witness {
    pub disjunct: usize,
    pub method: Method,
    pub strategy: Strategy,
    /// Present when self-checking: the disjunct's properties and their
    /// validated probabilities.
    pub report: Option<(Vec<String>, ValidationReport)>,
}

#[derive(Clone, Debug)]
pub struct QueryOutcome {
    pub sat: bool,
    pub normalized: NormalizedQuery,
    pub witness: Option<Witness>,
}

fn is_qualitative(c: &Conjunct) -> bool {
    c.iter().all(|a| (a.strict && a.value.is_zero()) || (!a.strict && a.value.is_one()))
}

fn decide_disjunct(
    m: &Mdp,
    table: &PropertyTable,
    c: &Conjunct,
    opts: &EvalOptions,
) -> Result<Option<(Method, Strategy)>> {
    if c.is_empty() {
        return Ok(Some((Method::Trivial, Strategy::default_pure(m))));
    }
    let props = c.iter().map(|a| table.get(&a.property).cloned()).collect::<Result<Vec<_>>>()?;
    if opts.qualitative && is_qualitative(c) {
        let automata: Vec<_> = props.iter().map(Property::automaton).collect();
        let q = QualitativeQuery {
            sure: (0..c.len()).filter(|&i| !c[i].strict).collect(),
            positive: (0..c.len()).filter(|&i| c[i].strict).collect(),
        };
        let out = decide_qualitative(m, &automata, &q)?;
        return Ok(out.strategy.map(|s| (Method::Qualitative, s)));
    }
    let names = c.iter().map(|a| a.property.clone()).collect();
    let problem = Problem::with_route(m, props, names, opts.route)?;
    let r: Vec<Rational> = c.iter().map(|a| a.value.clone()).collect();
    let strict: Vec<usize> = (0..c.len()).filter(|&i| c[i].strict).collect();
    let d = problem.achievable(&r, &strict)?;
    Ok(d.strategy.filter(|_| d.achievable).map(|s| (Method::Quantitative, s)))
}

fn check(m: &Mdp, table: &PropertyTable, c: &Conjunct, s: &Strategy) -> Result<(Vec<String>, ValidationReport)> {
    let names: Vec<String> = c.iter().map(|a| a.property.clone()).collect();
    let props = names.iter().map(|n| table.get(n).cloned()).collect::<Result<Vec<_>>>()?;
    let claims: Vec<Claim> = c.iter().map(|a| a.claim()).collect();
    let report = validate_strategy(m, &props, s, &claims)?;
    if !report.passed() {
        return Err(Error::Internal(format!(
            "self-check failed: witness does not meet its bounds\n{}",
            report.render(&names)
        )));
    }
    Ok((names, report))
}

/// Evaluates an already normalized query: the first satisfiable disjunct
/// (by index) provides the witness.
pub fn evaluate_normalized(
    m: &Mdp,
    table: &PropertyTable,
    normalized: NormalizedQuery,
    opts: &EvalOptions,
) -> Result<QueryOutcome> {
    let found = normalized
        .disjuncts
        .par_iter()
        .enumerate()
        .map(|(i, c)| decide_disjunct(m, table, c, opts).map(|w| w.map(|w| (i, w))))
        .find_first(|r| !matches!(r, Ok(None)));
    let witness = match found {
        None => None,
        Some(Err(e)) => return Err(e),
        Some(Ok(None)) => unreachable!("filtered out"),
        Some(Ok(Some((i, (method, strategy))))) => {
            let report = if opts.self_check {
                Some(check(m, table, &normalized.disjuncts[i], &strategy)?)
            } else {
                None
            };
            Some(Witness { disjunct: i, method, strategy, report })
        }
    };
    Ok(QueryOutcome { sat: witness.is_some(), normalized, witness })
}

/// Is there a strategy satisfying `q`?
pub fn evaluate(m: &Mdp, table: &PropertyTable, q: &Query, opts: &EvalOptions) -> Result<QueryOutcome> {
    for name in q.properties() {
        table.get(&name)?;
    }
    let normalized = normalize(q, &table.complements, opts.dnf_cap)?;
    evaluate_normalized(m, table, normalized, opts)
}

/// Do all strategies satisfy `q`? Answered as "no strategy satisfies `¬q`";
/// the outcome's witness, if any, is a counterexample.
pub fn evaluate_forall(m: &Mdp, table: &PropertyTable, q: &Query, opts: &EvalOptions) -> Result<QueryOutcome> {
    let negated = Query::Not(Box::new(q.clone()));
    let mut out = evaluate(m, table, &negated, opts)?;
    out.sat = !out.sat;
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct GuaranteeOutcome {
    pub holds: bool,
    /// A strategy with `Pr(φ1) ≥ r1` and `Pr(φ2) < r2`, with both exact
    /// probabilities.
    pub counterexample: Option<(Strategy, Rational, Rational)>,
}

/// Whether every strategy with `Pr(φ1) ≥ r1` also has `Pr(φ2) ≥ r2`, given
/// the complement `φ̄2` of `φ2`.
pub fn check_assume_guarantee(
    m: &Mdp,
    phi1: &Property,
    r1: &Rational,
    phi2_complement: &Property,
    r2: &Rational,
    route: RouteChoice,
) -> Result<GuaranteeOutcome> {
    let holds = GuaranteeOutcome { holds: true, counterexample: None };
    if r2.is_zero() {
        return Ok(holds);
    }
    let props = vec![phi1.clone(), phi2_complement.clone()];
    let problem = Problem::with_route(m, props.clone(), vec!["assume".into(), "not-guarantee".into()], route)?;
    let d = problem.achievable(&[r1.clone(), Rational::one() - r2], &[1])?;
    match d.strategy.filter(|_| d.achievable) {
        None => Ok(holds),
        Some(s) => {
            let v = crate::oracle::validate::evaluate_properties(m, &props, &s)?;
            let p2 = Rational::one() - &v[1];
            if v[0] < *r1 || p2 >= *r2 {
                return Err(Error::Internal("assume-guarantee counterexample does not validate".into()));
            }
            Ok(GuaranteeOutcome {
                holds: false,
                counterexample: Some((s, v[0].clone(), p2)),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::RabinAutomaton;
    use crate::num::{int, rat};
    use crate::query::parse::parse_query;

    fn split() -> Mdp {
        let mut b = Mdp::builder();
        b.state("s", Vec::<&str>::new())
            .state("t1", ["P1"])
            .state("t2", ["P2"])
            .state("x", Vec::<&str>::new())
            .action("s", "a1", [("t1", rat(3, 5)), ("x", rat(2, 5))])
            .action("s", "a2", [("t2", rat(4, 5)), ("x", rat(1, 5))])
            .action("s", "a3", [("t1", rat(1, 2)), ("t2", rat(1, 2))])
            .action("t1", "stay", [("t1", int(1))])
            .action("t2", "stay", [("t2", int(1))])
            .action("x", "stay", [("x", int(1))])
            .init_state("s");
        b.build().unwrap()
    }

    fn split_table() -> PropertyTable {
        let mut t = PropertyTable::new();
        t.add("reachP1", Property::Reach("P1".into())).unwrap();
        t.add("reachP2", Property::Reach("P2".into())).unwrap();
        t.add("avoidP1", Property::Avoid("P1".into())).unwrap();
        t.add("avoidP2", Property::Avoid("P2".into())).unwrap();
        t.complement("reachP1", "avoidP1").unwrap();
        t.complement("reachP2", "avoidP2").unwrap();
        t
    }

    fn eval(text: &str) -> QueryOutcome {
        evaluate(&split(), &split_table(), &parse_query(text).unwrap(), &EvalOptions::default()).unwrap()
    }

    #[test]
    fn split_queries() {
        let yes = eval("Pr(reachP1) >= 0.5 & Pr(reachP2) >= 0.5");
        assert!(yes.sat);
        let w = yes.witness.unwrap();
        assert_eq!(w.method, Method::Quantitative);
        assert_eq!(w.report.unwrap().1.values, vec![rat(1, 2), rat(1, 2)]);
        assert!(!eval("Pr(reachP1) >= 0.55 & Pr(reachP2) >= 0.3").sat);
        assert!(!eval("Pr(reachP1) > 1/2 & Pr(reachP2) > 1/2").sat);
        // second disjunct wins
        let out = eval("Pr(reachP1) >= 0.7 | Pr(reachP2) >= 0.7");
        assert_eq!(out.witness.unwrap().disjunct, 1);
    }

    #[test]
    fn upper_bounds_through_complements() {
        // Pr(◇P1) ≤ 1/10 ∧ Pr(◇P2) ≥ 3/4: play a2
        assert!(eval("Pr(reachP1) <= 1/10 & Pr(reachP2) >= 3/4").sat);
        assert!(!eval("Pr(reachP1) <= 1/10 & Pr(reachP2) > 4/5").sat);
        assert!(eval("Pr(reachP1) = 1/2 & Pr(reachP2) = 1/2").sat);
    }

    #[test]
    fn qualitative_routing_matches_quantitative() {
        let m = split();
        let t = split_table();
        for text in ["Pr(reachP1) > 0 & Pr(reachP2) > 0", "Pr(reachP1) >= 1", "Pr(avoidP1) >= 1 & Pr(reachP2) > 0"] {
            let q = parse_query(text).unwrap();
            let a = evaluate(&m, &t, &q, &EvalOptions::default()).unwrap();
            let b = evaluate(&m, &t, &q, &EvalOptions { qualitative: false, ..EvalOptions::default() }).unwrap();
            assert_eq!(a.sat, b.sat, "{text}");
        }
        assert_eq!(eval("Pr(reachP1) > 0 & Pr(reachP2) > 0").witness.unwrap().method, Method::Qualitative);
    }

    #[test]
    fn forall_and_unknown_names() {
        let m = split();
        let t = split_table();
        let q = parse_query("Pr(reachP1) + Pr(reachP2) >= 0").err();
        assert!(q.is_some());
        let q = parse_query("Pr(reachP1) <= 3/5").unwrap();
        assert!(evaluate_forall(&m, &t, &q, &EvalOptions::default()).unwrap().sat);
        let q = parse_query("Pr(reachP1) <= 1/2").unwrap();
        let out = evaluate_forall(&m, &t, &q, &EvalOptions::default()).unwrap();
        assert!(!out.sat && out.witness.is_some());
        let q = parse_query("Pr(nope) >= 0").unwrap();
        assert!(matches!(evaluate(&m, &t, &q, &EvalOptions::default()), Err(Error::Unknown { .. })));
    }

    #[test]
    fn assume_guarantee() {
        let m = split();
        let p1 = Property::Reach("P1".into());
        let not_p2 = Property::Avoid("P2".into());
        let out = check_assume_guarantee(&m, &p1, &rat(3, 5), &not_p2, &rat(1, 10), RouteChoice::Auto).unwrap();
        assert!(!out.holds);
        let (_, v1, v2) = out.counterexample.unwrap();
        assert_eq!((v1, v2), (rat(3, 5), int(0)));
        // no strategy reaches P1 almost surely: holds vacuously
        assert!(check_assume_guarantee(&m, &p1, &int(1), &not_p2, &rat(1, 2), RouteChoice::Auto).unwrap().holds);
        assert!(check_assume_guarantee(&m, &p1, &int(0), &not_p2, &int(0), RouteChoice::Auto).unwrap().holds);
        // under Pr(◇P2) ≥ 1/2, Pr(◇P1) is at most 1/2, so Pr(□¬P1) ≥ 1/2
        let p2 = Property::Reach("P2".into());
        assert!(check_assume_guarantee(&m, &p2, &rat(1, 2), &p1, &rat(1, 2), RouteChoice::Auto).unwrap().holds);
        assert!(!check_assume_guarantee(&m, &p2, &rat(1, 2), &p1, &rat(3, 5), RouteChoice::Auto).unwrap().holds);
        let buchi = Property::Automaton(RabinAutomaton::infinitely_often("P2"));
        assert!(check_assume_guarantee(&m, &buchi, &rat(1, 2), &p1, &rat(1, 2), RouteChoice::Auto).unwrap().holds);
        assert!(!check_assume_guarantee(&m, &buchi, &rat(1, 2), &p1, &rat(3, 5), RouteChoice::Auto).unwrap().holds);
    }
}
