//! Exact strategy validation on the induced Markov chain.
//!
//! Reachability and avoidance are first-passage probabilities. Automaton
//! properties run the automaton alongside the chain (it reads the label of
//! every state entered, the initial one included) and sum the absorption
//! probabilities of the bottom components whose automaton states satisfy an
//! acceptance pair.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use crate::automata::RabinAutomaton;
use crate::error::{Error, Result};
use crate::model::chain::{bscc_analysis, induced_chain, InducedChain, MarkovChain};
use crate::model::mdp::Mdp;
use crate::model::strategy::Strategy;
use crate::num::{decimal12, format_rational, parse_rational, Rational};
use crate::objectives::Property;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Comparator {
    Ge,
    Gt,
    Le,
    Lt,
    Eq,
    Ne,
}

impl Comparator {
    pub fn holds(self, value: &Rational, bound: &Rational) -> bool {
        match self {
            Comparator::Ge => value >= bound,
            Comparator::Gt => value > bound,
            Comparator::Le => value <= bound,
            Comparator::Lt => value < bound,
            Comparator::Eq => value == bound,
            Comparator::Ne => value != bound,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Ge => ">=",
            Comparator::Gt => ">",
            Comparator::Le => "<=",
            Comparator::Lt => "<",
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
        }
    }
}

impl FromStr for Comparator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            ">=" => Comparator::Ge,
            ">" => Comparator::Gt,
            "<=" => Comparator::Le,
            "<" => Comparator::Lt,
            "=" | "==" => Comparator::Eq,
            "!=" => Comparator::Ne,
            other => return Err(Error::invalid(format!("unknown comparator {other:?}"))),
        })
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Claim {
    pub cmp: Comparator,
    pub bound: Rational,
}

impl Claim {
    pub fn new(cmp: Comparator, bound: Rational) -> Self {
        Claim { cmp, bound }
    }

    pub fn at_least(bound: Rational) -> Self {
        Claim::new(Comparator::Ge, bound)
    }

    pub fn above(bound: Rational) -> Self {
        Claim::new(Comparator::Gt, bound)
    }
}

impl fmt::Display for Claim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.cmp.symbol(), format_rational(&self.bound))
    }
}

impl FromStr for Claim {
    type Err = Error;

    /// `">=1/2"`, `">0"`, or a bare number meaning `>=`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let split = s.find(|c: char| !matches!(c, '<' | '>' | '=' | '!')).unwrap_or(s.len());
        let (op, num) = s.split_at(split);
        let cmp = if op.is_empty() { Comparator::Ge } else { op.parse()? };
        Ok(Claim::new(cmp, parse_rational(num.trim())?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub values: Vec<Rational>,
    pub claims: Vec<Claim>,
    pub results: Vec<bool>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|&b| b)
    }

    /// One line per objective: exact value, decimal, claim and verdict.
    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, v) in self.values.iter().enumerate() {
            let name = names.get(i).map_or_else(|| format!("#{}", i + 1), Clone::clone);
            out.push_str(&format!("{name}: {} ({})", format_rational(v), decimal12(v)));
            if let (Some(c), Some(ok)) = (self.claims.get(i), self.results.get(i)) {
                out.push_str(&format!(
                    " {} {} {}",
                    c.cmp,
                    format_rational(&c.bound),
                    if *ok { "ok" } else { "FAILED" }
                ));
            }
            out.push('\n');
        }
        out.push_str(if self.passed() { "result: pass\n" } else { "result: fail\n" });
        out
    }
}

/// Exact probability of every property under `s`.
pub fn evaluate_properties(m: &Mdp, props: &[Property], s: &Strategy) -> Result<Vec<Rational>> {
    let chain = induced_chain(m, s)?;
    props.iter().map(|p| property_probability(m, &chain, p)).collect()
}

fn property_probability(m: &Mdp, c: &InducedChain, p: &Property) -> Result<Rational> {
    match p {
        Property::Reach(l) => {
            require_label(m, l)?;
            c.chain.reach_probability(&c.lift(&m.label_set(l)))
        }
        Property::Avoid(l) => {
            require_label(m, l)?;
            Ok(Rational::one() - c.chain.reach_probability(&c.lift(&m.label_set(l)))?)
        }
        Property::Automaton(a) => automaton_probability(m, c, a),
    }
}

fn require_label(m: &Mdp, l: &str) -> Result<()> {
    if m.propositions().contains(l) {
        Ok(())
    } else {
        Err(Error::unknown("label", l))
    }
}

/// Probability that the automaton accepts the label sequence of the chain.
pub fn automaton_probability(m: &Mdp, c: &InducedChain, a: &RabinAutomaton) -> Result<Rational> {
    let missing: Vec<String> = a.aps().iter().filter(|ap| !m.propositions().contains(*ap)).cloned().collect();
    if !missing.is_empty() {
        return Err(Error::AlphabetMismatch { missing });
    }
    let letter: Vec<usize> = c.states.iter().map(|(v, _)| a.valuation(m.labels(*v))).collect();
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut keys: Vec<(usize, usize)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: (usize, usize), keys: &mut Vec<(usize, usize)>, queue: &mut VecDeque<usize>| {
        *index.entry(key).or_insert_with(|| {
            keys.push(key);
            queue.push_back(keys.len() - 1);
            keys.len() - 1
        })
    };
    let mut initial = Vec::new();
    for (i, p) in &c.chain.initial {
        let q = a.step_valuation(a.initial(), letter[*i]);
        initial.push((intern((*i, q), &mut keys, &mut queue), p.clone()));
    }
    let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
    while let Some(k) = queue.pop_front() {
        let (i, q) = keys[k];
        let row: Vec<(usize, Rational)> = c.chain.rows[i]
            .iter()
            .map(|(j, p)| {
                let q2 = a.step_valuation(q, letter[*j]);
                (intern((*j, q2), &mut keys, &mut queue), p.clone())
            })
            .collect();
        if rows.len() <= k {
            rows.resize(k + 1, Vec::new());
        }
        rows[k] = row;
    }
    rows.resize(keys.len(), Vec::new());
    for row in &mut rows {
        row.sort_by_key(|(j, _)| *j);
    }
    let product = MarkovChain { rows, initial };
    let analysis = bscc_analysis(&product)?;
    Ok(analysis
        .components
        .iter()
        .zip(&analysis.absorption)
        .filter(|(comp, _)| {
            let inf: BTreeSet<usize> = comp.iter().map(|&k| keys[k].1).collect();
            a.accepts_inf(&inf)
        })
        .fold(Rational::zero(), |acc, (_, p)| acc + p))
}

/// Computes every property's probability under `s` and checks each claim.
/// `claims` may be shorter than `props`; unclaimed properties are reported
/// without a verdict.
pub fn validate_strategy(
    m: &Mdp,
    props: &[Property],
    s: &Strategy,
    claims: &[Claim],
) -> Result<ValidationReport> {
    if claims.len() > props.len() {
        return Err(Error::invalid("more claims than properties"));
    }
    let values = evaluate_properties(m, props, s)?;
    let results = claims.iter().zip(&values).map(|(c, v)| c.cmp.holds(v, &c.bound)).collect();
    Ok(ValidationReport {
        values,
        claims: claims.to_vec(),
        results,
    })
}

/// Claims `≥ r_i`, or `> r_i` for `i ∈ strict`.
pub fn bound_claims(r: &[Rational], strict: &[usize]) -> Vec<Claim> {
    r.iter()
        .enumerate()
        .map(|(i, b)| {
            let cmp = if strict.contains(&i) { Comparator::Gt } else { Comparator::Ge };
            Claim::new(cmp, b.clone())
        })
        .collect()
}
