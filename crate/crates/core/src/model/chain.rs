//! Markov chains induced by strategies, with exact first-passage and
//! bottom-SCC analysis.

use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::{backward_reachable, tarjan_scc};
use crate::linalg::solve;
use crate::model::mdp::Mdp;
use crate::model::strategy::Strategy;
use crate::num::Rational;

/// A finite Markov chain given by sparse rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    /// `rows[i]` lists `(j, P(i, j))` with positive entries, sorted by `j`.
    pub rows: Vec<Vec<(usize, Rational)>>,
    pub initial: Vec<(usize, Rational)>,
}

impl MarkovChain {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn successors(&self, i: usize) -> Vec<usize> {
        self.rows[i].iter().map(|(j, _)| *j).collect()
    }

    /// Exact stochasticity check: every row sums to 1, entries positive.
    pub fn check_stochastic(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            let total = row.iter().fold(Rational::zero(), |acc, (_, p)| acc + p);
            if !total.is_one() || row.iter().any(|(_, p)| *p <= Rational::zero()) {
                return Err(Error::Internal(format!("chain row {i} is not stochastic")));
            }
        }
        Ok(())
    }

    fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for (j, _) in row {
                preds[*j].push(i);
            }
        }
        preds
    }

    /// Probability of eventually hitting `target`, from every chain state.
    ///
    /// States that cannot reach the target get 0; the remaining transient
    /// states are solved component by component in reverse topological
    /// order, so each linear system is only as large as one SCC.
    pub fn hit_probabilities(&self, target: &[bool]) -> Result<Vec<Rational>> {
        let n = self.len();
        let can = backward_reachable(n, &self.predecessors(), target);
        let mut x: Vec<Rational> = (0..n)
            .map(|i| if target[i] { Rational::one() } else { Rational::zero() })
            .collect();
        let active: Vec<bool> = (0..n).map(|i| can[i] && !target[i]).collect();
        for comp in tarjan_scc(n, &active, |i| self.successors(i)) {
            let local: HashMap<usize, usize> =
                comp.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let size = comp.len();
            let mut a = vec![vec![Rational::zero(); size]; size];
            let mut b = vec![Rational::zero(); size];
            for (k, &i) in comp.iter().enumerate() {
                a[k][k] = Rational::one();
                for (j, p) in &self.rows[i] {
                    match local.get(j) {
                        Some(&l) => a[k][l] -= p,
                        None => b[k] += p.clone() * x[*j].clone(),
                    }
                }
            }
            let sol = solve(a, b)
                .ok_or_else(|| Error::Internal("singular first-passage system".into()))?;
            for (k, &i) in comp.iter().enumerate() {
                x[i] = sol[k].clone();
            }
        }
        Ok(x)
    }

    /// Probability of eventually hitting `target` from the initial distribution.
    pub fn reach_probability(&self, target: &[bool]) -> Result<Rational> {
        let x = self.hit_probabilities(target)?;
        Ok(self
            .initial
            .iter()
            .fold(Rational::zero(), |acc, (i, p)| acc + p.clone() * x[*i].clone()))
    }

    /// Bottom strongly connected components, each sorted, ordered by their
    /// least member.
    pub fn bsccs(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comps: Vec<Vec<usize>> = tarjan_scc(n, &vec![true; n], |i| self.successors(i))
            .into_iter()
            .filter(|comp| {
                let inside = |j: &usize| comp.binary_search(j).is_ok();
                comp.iter().all(|&i| self.rows[i].iter().all(|(j, _)| inside(j)))
            })
            .collect();
        comps.sort();
        comps
    }
}

/// The chain over (MDP state, strategy mode) pairs reachable under a strategy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedChain {
    pub states: Vec<(usize, usize)>,
    pub chain: MarkovChain,
}

impl InducedChain {
    /// Dense transition matrix.
    pub fn matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.states.len();
        let mut out = vec![vec![Rational::zero(); n]; n];
        for (i, row) in self.chain.rows.iter().enumerate() {
            for (j, p) in row {
                out[i][*j] = p.clone();
            }
        }
        out
    }

    /// Chain states whose MDP component lies in `target`.
    pub fn lift(&self, target: &[bool]) -> Vec<bool> {
        self.states.iter().map(|(v, _)| target[*v]).collect()
    }
}

pub fn induced_chain(m: &Mdp, s: &Strategy) -> Result<InducedChain> {
    induced_chain_from(m, s, m.init())
}

/// Induced chain for an explicit initial distribution over MDP states.
pub fn induced_chain_from(
    m: &Mdp,
    s: &Strategy,
    init: &[(usize, Rational)],
) -> Result<InducedChain> {
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut states = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |key: (usize, usize), states: &mut Vec<(usize, usize)>, queue: &mut VecDeque<usize>| {
        *index.entry(key).or_insert_with(|| {
            states.push(key);
            queue.push_back(states.len() - 1);
            states.len() - 1
        })
    };
    let mode0 = s.initial_mode();
    let mut initial = Vec::new();
    for (v, p) in init {
        if *v >= m.num_states() {
            return Err(Error::invalid("initial distribution refers to an unknown state"));
        }
        initial.push((intern((*v, mode0), &mut states, &mut queue), p.clone()));
    }
    let mut rows: Vec<Vec<(usize, Rational)>> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let (v, mode) = states[i];
        let choice = s.choice(v, mode).ok_or_else(|| {
            Error::invalid(format!(
                "strategy has no choice for state {:?} in mode {:?}",
                m.name(v),
                s.modes()[mode]
            ))
        })?;
        let mut row: BTreeMap<usize, Rational> = BTreeMap::new();
        for (a, pa) in choice {
            if *a >= m.actions(v).len() {
                return Err(Error::invalid(format!(
                    "strategy plays an action that is not enabled at {:?}",
                    m.name(v)
                )));
            }
            for t in &m.action(v, *a).transitions {
                for (next, pm) in s.next_modes(v, mode, *a, t.to) {
                    let j = intern((t.to, next), &mut states, &mut queue);
                    *row.entry(j).or_insert_with(Rational::zero) +=
                        pa.clone() * t.prob.clone() * pm;
                }
            }
        }
        if rows.len() <= i {
            rows.resize(i + 1, Vec::new());
        }
        rows[i] = row.into_iter().filter(|(_, p)| !p.is_zero()).collect();
    }
    rows.resize(states.len(), Vec::new());
    let chain = MarkovChain { rows, initial };
    chain.check_stochastic()?;
    Ok(InducedChain { states, chain })
}

/// Probability of eventually visiting each target set of MDP states.
pub fn reach_probabilities(c: &InducedChain, targets: &[Vec<bool>]) -> Result<Vec<Rational>> {
    targets
        .iter()
        .map(|t| c.chain.reach_probability(&c.lift(t)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BsccAnalysis {
    pub components: Vec<Vec<usize>>,
    /// Probability of ending in each component, from the initial distribution.
    pub absorption: Vec<Rational>,
}

pub fn bscc_analysis(c: &MarkovChain) -> Result<BsccAnalysis> {
    let components = c.bsccs();
    let mut absorption = Vec::with_capacity(components.len());
    for comp in &components {
        let mut target = vec![false; c.len()];
        for &i in comp {
            target[i] = true;
        }
        absorption.push(c.reach_probability(&target)?);
    }
    Ok(BsccAnalysis {
        components,
        absorption,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn cycle(n: usize) -> MarkovChain {
        MarkovChain {
            rows: (0..n).map(|i| vec![((i + 1) % n, int(1))]).collect(),
            initial: vec![(0, int(1))],
        }
    }

    #[test]
    fn single_cycle_is_one_bscc() {
        let a = bscc_analysis(&cycle(4)).unwrap();
        assert_eq!(a.components, vec![vec![0, 1, 2, 3]]);
        assert_eq!(a.absorption, vec![int(1)]);
    }

    #[test]
    fn gamblers_ruin() {
        // 0 and 3 absorbing, 1 and 2 move left/right with 1/2.
        let c = MarkovChain {
            rows: vec![
                vec![(0, int(1))],
                vec![(0, rat(1, 2)), (2, rat(1, 2))],
                vec![(1, rat(1, 2)), (3, rat(1, 2))],
                vec![(3, int(1))],
            ],
            initial: vec![(1, int(1))],
        };
        let x = c.hit_probabilities(&[false, false, false, true]).unwrap();
        assert_eq!(x, vec![int(0), rat(1, 3), rat(2, 3), int(1)]);
        let a = bscc_analysis(&c).unwrap();
        assert_eq!(a.components, vec![vec![0], vec![3]]);
        assert_eq!(a.absorption, vec![rat(2, 3), rat(1, 3)]);
    }

    #[test]
    fn rows_sum_to_one_under_mixing() {
        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new())
            .state("y", ["P"])
            .action("x", "a", [("y", rat(1, 3)), ("x", rat(2, 3))])
            .action("x", "b", [("y", int(1))])
            .action("y", "c", [("y", int(1))])
            .init_state("x");
        let m = b.build().unwrap();
        let s = Strategy::memoryless(&m, vec![vec![(0, rat(1, 2)), (1, rat(1, 2))], vec![(0, int(1))]])
            .unwrap();
        let c = induced_chain(&m, &s).unwrap();
        assert_eq!(c.matrix(), vec![vec![rat(1, 3), rat(2, 3)], vec![int(0), int(1)]]);
        assert_eq!(reach_probabilities(&c, &[m.label_set("P")]).unwrap(), vec![int(1)]);
        // the initial state is trivially reached
        assert_eq!(reach_probabilities(&c, &[vec![true, false]]).unwrap(), vec![int(1)]);
    }

    #[test]
    fn missing_choice_is_reported() {
        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new()).action("x", "a", [("x", int(1))]);
        let m = b.build().unwrap();
        let s = Strategy::new(
            &m,
            vec!["0".into()],
            0,
            Default::default(),
            Default::default(),
        )
        .unwrap();
        assert!(induced_chain(&m, &s).is_err());
    }
}
