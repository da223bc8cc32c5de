use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Upper bound on atomic propositions read by one automaton; transitions are
/// tabulated over all valuations.
pub const MAX_APS: usize = 16;

/// Acceptance pair: accepted when `avoid` is visited finitely often and
/// `repeat` infinitely often.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RabinPair {
    pub avoid: BTreeSet<usize>,
    pub repeat: BTreeSet<usize>,
}

/// Deterministic, complete Rabin automaton over valuations of `aps`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RabinAutomaton {
    aps: Vec<String>,
    initial: usize,
    /// `delta[q][valuation]`; bit `i` of a valuation is set iff `aps[i]` holds.
    delta: Vec<Vec<usize>>,
    pairs: Vec<RabinPair>,
}

impl RabinAutomaton {
    pub fn new(
        aps: Vec<String>,
        initial: usize,
        delta: Vec<Vec<usize>>,
        pairs: Vec<RabinPair>,
    ) -> Result<Self> {
        if aps.len() > MAX_APS {
            return Err(Error::CapExceeded {
                what: format!("{} atomic propositions", aps.len()),
                limit: MAX_APS as u64,
            });
        }
        let n = delta.len();
        if n == 0 || initial >= n {
            return Err(Error::invalid("automaton needs a valid initial state"));
        }
        let width = 1usize << aps.len();
        for row in &delta {
            if row.len() != width {
                return Err(Error::invalid("transition function not total"));
            }
            if row.iter().any(|&q| q >= n) {
                return Err(Error::invalid("transition to an undeclared automaton state"));
            }
        }
        if pairs.is_empty() {
            return Err(Error::invalid("automaton has no acceptance pair"));
        }
        if pairs
            .iter()
            .any(|p| p.avoid.iter().chain(&p.repeat).any(|&q| q >= n))
        {
            return Err(Error::invalid("acceptance pair names an undeclared state"));
        }
        Ok(RabinAutomaton {
            aps,
            initial,
            delta,
            pairs,
        })
    }

    pub fn aps(&self) -> &[String] {
        &self.aps
    }

    pub fn num_states(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    pub fn valuation(&self, labels: &BTreeSet<String>) -> usize {
        self.aps
            .iter()
            .enumerate()
            .filter(|(_, p)| labels.contains(*p))
            .fold(0, |acc, (i, _)| acc | (1 << i))
    }

    pub fn step_valuation(&self, q: usize, valuation: usize) -> usize {
        self.delta[q][valuation]
    }

    pub fn step(&self, q: usize, labels: &BTreeSet<String>) -> usize {
        self.delta[q][self.valuation(labels)]
    }

    /// Whether a run visiting exactly `inf` infinitely often is accepted.
    pub fn accepts_inf(&self, inf: &BTreeSet<usize>) -> bool {
        self.pairs.iter().any(|p| self.pair_holds(p, inf))
    }

    pub fn pair_holds(&self, p: &RabinPair, inf: &BTreeSet<usize>) -> bool {
        p.avoid.is_disjoint(inf) && !p.repeat.is_disjoint(inf)
    }

    /// `◇label`: state 1 is entered on the first `label` and kept.
    pub fn reach(label: &str) -> Self {
        RabinAutomaton::new(
            vec![label.to_string()],
            0,
            vec![vec![0, 1], vec![1, 1]],
            vec![RabinPair {
                avoid: BTreeSet::new(),
                repeat: BTreeSet::from([1]),
            }],
        )
        .expect("well-formed")
    }

    /// `□¬label`, the complement of [`RabinAutomaton::reach`].
    pub fn avoid(label: &str) -> Self {
        RabinAutomaton::new(
            vec![label.to_string()],
            0,
            vec![vec![0, 1], vec![1, 1]],
            vec![RabinPair {
                avoid: BTreeSet::from([1]),
                repeat: BTreeSet::from([0]),
            }],
        )
        .expect("well-formed")
    }

    /// `□◇label`: state 1 marks the last letter satisfying `label`.
    pub fn infinitely_often(label: &str) -> Self {
        RabinAutomaton::new(
            vec![label.to_string()],
            0,
            vec![vec![0, 1], vec![0, 1]],
            vec![RabinPair {
                avoid: BTreeSet::new(),
                repeat: BTreeSet::from([1]),
            }],
        )
        .expect("well-formed")
    }

    /// `◇□¬label`, the complement of [`RabinAutomaton::infinitely_often`].
    pub fn finitely_often(label: &str) -> Self {
        RabinAutomaton::new(
            vec![label.to_string()],
            0,
            vec![vec![0, 1], vec![0, 1]],
            vec![RabinPair {
                avoid: BTreeSet::from([1]),
                repeat: BTreeSet::from([0]),
            }],
        )
        .expect("well-formed")
    }

    /// HOA rendering with one explicit edge per valuation.
    pub fn to_hoa(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "HOA: v1");
        let _ = writeln!(out, "States: {}", self.num_states());
        let _ = writeln!(out, "Start: {}", self.initial);
        let aps: Vec<String> = self.aps.iter().map(|a| format!("{a:?}")).collect();
        let _ = writeln!(out, "AP: {} {}", self.aps.len(), aps.join(" "));
        let terms: Vec<String> = (0..self.pairs.len())
            .map(|i| format!("(Fin({}) & Inf({}))", 2 * i, 2 * i + 1))
            .collect();
        let _ = writeln!(
            out,
            "Acceptance: {} {}",
            2 * self.pairs.len(),
            terms.join(" | ")
        );
        let _ = writeln!(out, "--BODY--");
        for q in 0..self.num_states() {
            let sets: Vec<String> = self
                .pairs
                .iter()
                .enumerate()
                .flat_map(|(i, p)| {
                    let mut s = Vec::new();
                    if p.avoid.contains(&q) {
                        s.push((2 * i).to_string());
                    }
                    if p.repeat.contains(&q) {
                        s.push((2 * i + 1).to_string());
                    }
                    s
                })
                .collect();
            if sets.is_empty() {
                let _ = writeln!(out, "State: {q}");
            } else {
                let _ = writeln!(out, "State: {q} {{{}}}", sets.join(" "));
            }
            for (val, succ) in self.delta[q].iter().enumerate() {
                let guard = if self.aps.is_empty() {
                    "t".to_string()
                } else {
                    (0..self.aps.len())
                        .map(|i| {
                            if val & (1 << i) != 0 {
                                i.to_string()
                            } else {
                                format!("!{i}")
                            }
                        })
                        .collect::<Vec<_>>()
                        .join(" & ")
                };
                let _ = writeln!(out, "[{guard}] {succ}");
            }
        }
        let _ = writeln!(out, "--END--");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(xs: &[&str]) -> BTreeSet<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn reach_and_avoid_are_complementary() {
        let r = RabinAutomaton::reach("P");
        let a = RabinAutomaton::avoid("P");
        for inf in [BTreeSet::from([0]), BTreeSet::from([1])] {
            assert_ne!(r.accepts_inf(&inf), a.accepts_inf(&inf));
        }
        assert_eq!(r.step(0, &labels(&["P"])), 1);
        assert_eq!(r.step(0, &labels(&["Q"])), 0);
    }

    #[test]
    fn recurrence_and_persistence_are_complementary() {
        let g = RabinAutomaton::infinitely_often("P");
        let f = RabinAutomaton::finitely_often("P");
        for inf in [
            BTreeSet::from([0]),
            BTreeSet::from([1]),
            BTreeSet::from([0, 1]),
        ] {
            assert_ne!(g.accepts_inf(&inf), f.accepts_inf(&inf));
        }
    }

    #[test]
    fn validates_shape() {
        assert!(RabinAutomaton::new(vec!["p".into()], 0, vec![vec![0]], vec![]).is_err());
        assert!(RabinAutomaton::new(
            vec![],
            0,
            vec![vec![0]],
            vec![RabinPair {
                avoid: BTreeSet::new(),
                repeat: BTreeSet::from([3])
            }]
        )
        .is_err());
    }
}
