//! Brute-force achievable sets.
//!
//! For reachability the outcome vectors of pure memoryless strategies span
//! the achievable set (its downward-closed convex hull). For automaton
//! properties the enumeration runs over strategies that remember the
//! current automaton states and play uniformly over a nonempty action subset
//! in every product state reached; each is evaluated by the validator on
//! the source model.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::One;
use rayon::prelude::*;

use crate::automata::RabinAutomaton;
use crate::error::{Error, Result};
use crate::geometry::DownHull;
use crate::model::chain::{induced_chain, reach_probabilities};
use crate::model::mdp::Mdp;
use crate::model::strategy::{uniform, Dist, Strategy};
use crate::num::Rational;
use crate::objectives::Property;
use crate::oracle::validate::evaluate_properties;

/// Default bound on the number of enumerated strategies.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct HullOracle {
    /// Distinct outcome vectors, in lexicographic order.
    pub points: Vec<Vec<Rational>>,
    pub hull: DownHull<Rational>,
    pub strategies: u64,
}

impl HullOracle {
    fn from_points(dim: usize, points: BTreeSet<Vec<Rational>>, strategies: u64) -> Self {
        let points: Vec<Vec<Rational>> = points.into_iter().collect();
        let hull = DownHull::new(dim, &points);
        HullOracle { points, hull, strategies }
    }

    pub fn contains(&self, r: &[Rational]) -> bool {
        self.hull.contains(r)
    }

    /// Achievability with strict inequalities on the coordinates in `strict`.
    pub fn achievable(&self, r: &[Rational], strict: &[usize]) -> bool {
        self.hull.contains_strict(r, strict)
    }

    pub fn vertices(&self) -> Vec<Vec<Rational>> {
        self.hull.vertices()
    }
}

fn checked_product(factors: impl Iterator<Item = usize>, cap: u64, what: &str) -> Result<u64> {
    let mut total: u64 = 1;
    for f in factors {
        total = total.saturating_mul(f as u64);
        if total > cap {
            return Err(Error::CapExceeded { what: what.into(), limit: cap });
        }
    }
    Ok(total)
}

/// Every pure memoryless strategy of `m`, evaluated against each target set.
pub fn build_hull_oracle(m: &Mdp, targets: &[Vec<bool>], cap: u64) -> Result<HullOracle> {
    if targets.is_empty() {
        return Err(Error::invalid("at least one target set is required"));
    }
    let radix: Vec<usize> = (0..m.num_states()).map(|v| m.actions(v).len()).collect();
    let total = checked_product(radix.iter().copied(), cap, "pure memoryless strategies")?;
    let points = (0..total)
        .into_par_iter()
        .map(|mut code| {
            let actions: Vec<usize> = radix
                .iter()
                .map(|&r| {
                    let a = (code % r as u64) as usize;
                    code /= r as u64;
                    a
                })
                .collect();
            let s = Strategy::pure(m, &actions)?;
            reach_probabilities(&induced_chain(m, &s)?, targets)
        })
        .collect::<Result<BTreeSet<_>>>()?;
    Ok(HullOracle::from_points(targets.len(), points, total))
}

/// Every memoryless strategy that plays uniformly over a nonempty action
/// subset at each state. Qualitative properties of memoryless strategies
/// only depend on these supports.
pub fn memoryless_supports(m: &Mdp, cap: u64) -> Result<Vec<Strategy>> {
    let options: Vec<Vec<Dist<usize>>> = (0..m.num_states()).map(|v| subsets(m.actions(v).len())).collect();
    checked_product(options.iter().map(Vec::len), cap, "memoryless supports")?;
    let mut out = Vec::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        let choice = pick.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect();
        out.push(Strategy::memoryless(m, choice)?);
        if !advance(&mut pick, &options.iter().map(Vec::len).collect::<Vec<_>>()) {
            return Ok(out);
        }
    }
}

/// Every pure strategy with exactly `k` memory modes (initial mode 0), with
/// deterministic mode updates on every transition.
pub fn pure_finite_memory(m: &Mdp, k: usize, cap: u64) -> Result<Vec<Strategy>> {
    if k == 0 {
        return Err(Error::invalid("at least one memory mode is required"));
    }
    let n = m.num_states();
    let mut slots: Vec<(usize, usize)> = Vec::new();
    let mut radix = Vec::new();
    for mode in 0..k {
        for v in 0..n {
            slots.push((v, mode));
            radix.push(m.actions(v).len());
        }
    }
    let mut moves: Vec<(usize, usize, usize, usize)> = Vec::new();
    for mode in 0..k {
        for v in 0..n {
            for (a, act) in m.actions(v).iter().enumerate() {
                for w in act.successors().collect::<BTreeSet<_>>() {
                    moves.push((v, mode, a, w));
                    radix.push(k);
                }
            }
        }
    }
    checked_product(radix.iter().copied(), cap, "pure finite-memory strategies")?;
    let modes: Vec<String> = (0..k).map(|i| i.to_string()).collect();
    let mut out = Vec::new();
    let mut pick = vec![0usize; radix.len()];
    loop {
        let choices: BTreeMap<(usize, usize), Dist<usize>> = slots
            .iter()
            .zip(&pick)
            .map(|(&key, &a)| (key, vec![(a, Rational::one())]))
            .collect();
        let updates = moves
            .iter()
            .zip(&pick[slots.len()..])
            .map(|(&key, &next)| (key, vec![(next, Rational::one())]))
            .collect();
        out.push(Strategy::new(m, modes.clone(), 0, choices, updates)?);
        if !advance(&mut pick, &radix) {
            return Ok(out);
        }
    }
}

/// Uniform distributions over the nonempty subsets of `0..n`.
fn subsets(n: usize) -> Vec<Dist<usize>> {
    (1u32..1 << n)
        .map(|mask| uniform(&(0..n).filter(|&a| mask & (1 << a) != 0).collect::<Vec<_>>()))
        .collect()
}

/// Mixed-radix increment; `false` after the last combination.
fn advance(pick: &mut [usize], radix: &[usize]) -> bool {
    for (p, &r) in pick.iter_mut().zip(radix) {
        *p += 1;
        if *p < r {
            return true;
        }
        *p = 0;
    }
    false
}

type Tuple = Vec<usize>;

/// Strategies over the source that remember the automaton states reached
/// so far. A mode holds the automaton states *before* reading the current
/// state's label, so the product state is `(v, δ(mode, L(v)))`.
struct AutomatonMemory<'a> {
    m: &'a Mdp,
    automata: Vec<RabinAutomaton>,
}

impl AutomatonMemory<'_> {
    fn read(&self, q: &[usize], v: usize) -> Tuple {
        self.automata
            .iter()
            .zip(q)
            .map(|(a, &qi)| a.step(qi, self.m.labels(v)))
            .collect()
    }

    /// Depth-first enumeration of subset assignments to the product states
    /// reachable under the assignment made so far.
    fn enumerate(&self, cap: u64) -> Result<Vec<BTreeMap<(usize, Tuple), usize>>> {
        let q0: Tuple = self.automata.iter().map(RabinAutomaton::initial).collect();
        let start: Vec<(usize, Tuple)> = self.m.init().iter().map(|(v, _)| (*v, self.read(&q0, *v))).collect();
        let mut out = Vec::new();
        self.extend(BTreeMap::new(), start, &mut out, cap)?;
        Ok(out)
    }

    fn extend(
        &self,
        assigned: BTreeMap<(usize, Tuple), usize>,
        mut frontier: Vec<(usize, Tuple)>,
        out: &mut Vec<BTreeMap<(usize, Tuple), usize>>,
        cap: u64,
    ) -> Result<()> {
        let next = loop {
            match frontier.pop() {
                None => {
                    if out.len() as u64 >= cap {
                        return Err(Error::CapExceeded {
                            what: "automaton-memory strategies".into(),
                            limit: cap,
                        });
                    }
                    out.push(assigned);
                    return Ok(());
                }
                Some(key) if assigned.contains_key(&key) => continue,
                Some(key) => break key,
            }
        };
        let (v, q) = next.clone();
        let n_act = self.m.actions(v).len();
        for mask in 1usize..1 << n_act {
            let mut assigned = assigned.clone();
            assigned.insert(next.clone(), mask);
            let mut frontier = frontier.clone();
            for a in (0..n_act).filter(|a| mask & (1 << a) != 0) {
                for w in self.m.action(v, a).successors() {
                    let key = (w, self.read(&q, w));
                    if !assigned.contains_key(&key) {
                        frontier.push(key);
                    }
                }
            }
            self.extend(assigned, frontier, out, cap)?;
        }
        Ok(())
    }

    fn strategy(&self, assigned: &BTreeMap<(usize, Tuple), usize>) -> Result<Strategy> {
        let q0: Tuple = self.automata.iter().map(RabinAutomaton::initial).collect();
        let mut modes: Vec<Tuple> = vec![q0];
        let mut mode_of: HashMap<Tuple, usize> = HashMap::from([(modes[0].clone(), 0)]);
        for (_, q) in assigned.keys() {
            if !mode_of.contains_key(q) {
                mode_of.insert(q.clone(), modes.len());
                modes.push(q.clone());
            }
        }
        let mut choices = BTreeMap::new();
        let mut updates = BTreeMap::new();
        for (i, before) in modes.iter().enumerate() {
            for v in 0..self.m.num_states() {
                let after = self.read(before, v);
                let Some(&mask) = assigned.get(&(v, after.clone())) else {
                    continue;
                };
                let n_act = self.m.actions(v).len();
                let acts: Vec<usize> = (0..n_act).filter(|a| mask & (1 << a) != 0).collect();
                choices.insert((v, i), uniform(&acts));
                let j = mode_of[&after];
                for &a in &acts {
                    for w in self.m.action(v, a).successors() {
                        updates.insert((v, i, a, w), vec![(j, Rational::one())]);
                    }
                }
            }
        }
        let names = modes
            .iter()
            .map(|q| q.iter().map(usize::to_string).collect::<Vec<_>>().join(","))
            .collect();
        Strategy::new(self.m, names, 0, choices, updates)
    }
}

/// Automaton-memory strategies that play uniformly over a nonempty action
/// subset per reachable product state, with their outcome vectors.
pub fn automaton_memory_strategies(m: &Mdp, props: &[Property], cap: u64) -> Result<Vec<(Strategy, Vec<Rational>)>> {
    let mem = AutomatonMemory {
        m,
        automata: props.iter().map(Property::automaton).collect(),
    };
    mem.enumerate(cap)?
        .par_iter()
        .map(|assigned| {
            let s = mem.strategy(assigned)?;
            let v = evaluate_properties(m, props, &s)?;
            Ok((s, v))
        })
        .collect()
}

/// Achievable set for arbitrary properties, spanned by automaton-memory
/// strategies with uniform subset choices.
pub fn build_automaton_oracle(m: &Mdp, props: &[Property], cap: u64) -> Result<HullOracle> {
    if props.is_empty() {
        return Err(Error::invalid("at least one property is required"));
    }
    let all = automaton_memory_strategies(m, props, cap)?;
    let count = all.len() as u64;
    let points = all.into_iter().map(|(_, v)| v).collect();
    Ok(HullOracle::from_points(props.len(), points, count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

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

    #[test]
    fn pure_memoryless_hull_of_the_three_action_model() {
        let m = split();
        let o = build_hull_oracle(&m, &[m.label_set("P1"), m.label_set("P2")], DEFAULT_CAP).unwrap();
        assert_eq!(o.strategies, 3);
        assert_eq!(
            o.vertices(),
            vec![vec![int(0), rat(4, 5)], vec![rat(1, 2), rat(1, 2)], vec![rat(3, 5), int(0)]]
        );
        assert!(o.contains(&[rat(3, 10), rat(2, 5)]));
        assert!(!o.achievable(&[rat(1, 2), rat(1, 2)], &[0, 1]));
        assert!(build_hull_oracle(&m, &[m.label_set("P1")], 2).is_err());
    }

    #[test]
    fn automaton_oracle_agrees_on_reachability() {
        let m = split();
        let props = vec![Property::Reach("P1".into()), Property::Reach("P2".into())];
        let o = build_automaton_oracle(&m, &props, DEFAULT_CAP).unwrap();
        // 7 nonempty subsets at s; every other state has one action
        assert_eq!(o.strategies, 7);
        assert_eq!(
            o.vertices(),
            vec![vec![int(0), rat(4, 5)], vec![rat(1, 2), rat(1, 2)], vec![rat(3, 5), int(0)]]
        );
    }

    #[test]
    fn enumeration_sizes() {
        let m = split();
        assert_eq!(memoryless_supports(&m, 100).unwrap().len(), 7);
        assert_eq!(pure_finite_memory(&m, 1, 100).unwrap().len(), 3);
        // two modes: 3^2 action choices times 2^18 updates (9 moves per mode)
        assert!(matches!(
            pure_finite_memory(&m, 2, DEFAULT_CAP),
            Err(Error::CapExceeded { .. })
        ));
    }
}
