//! Implicit finite-memory controllers and their materialization into
//! explicit [`Strategy`] tables.
//!
//! Composite strategies (two-phase qualitative witnesses, lifted reduction
//! strategies, projections from product MDPs) are described as controllers
//! over structured modes and only turned into tables once, for the reachable
//! (state, mode) pairs.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Debug;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::model::mdp::Mdp;
use crate::model::strategy::{merge_dist, Dist, Strategy};
use crate::num::Rational;

pub trait Controller {
    type Mode: Clone + Ord + Debug;

    fn initial_mode(&self) -> Self::Mode;

    fn choice(&self, state: usize, mode: &Self::Mode) -> Result<Dist<usize>>;

    fn update(
        &self,
        state: usize,
        mode: &Self::Mode,
        action: usize,
        succ: usize,
    ) -> Result<Dist<Self::Mode>>;

    fn mode_name(&self, mode: &Self::Mode) -> String;
}

impl Controller for Strategy {
    type Mode = usize;

    fn initial_mode(&self) -> usize {
        Strategy::initial_mode(self)
    }

    fn choice(&self, state: usize, mode: &usize) -> Result<Dist<usize>> {
        Strategy::choice(self, state, *mode).cloned().ok_or_else(|| {
            Error::invalid(format!(
                "strategy has no choice for state #{state} in mode {:?}",
                self.modes()[*mode]
            ))
        })
    }

    fn update(&self, state: usize, mode: &usize, action: usize, succ: usize) -> Result<Dist<usize>> {
        Ok(self.next_modes(state, *mode, action, succ))
    }

    fn mode_name(&self, mode: &usize) -> String {
        self.modes()[*mode].clone()
    }
}

/// One component of a randomized mixture of controllers at a single state:
/// with probability `weight` the component is active and plays `choice`.
#[derive(Clone, Debug)]
pub struct Branch<T> {
    pub weight: Rational,
    pub choice: Dist<usize>,
    pub tag: T,
}

/// Marginal action distribution of a mixture.
pub fn mix_choice<T>(branches: &[Branch<T>]) -> Dist<usize> {
    merge_dist(branches.iter().flat_map(|b| {
        b.choice
            .iter()
            .map(move |(a, p)| (*a, b.weight.clone() * p.clone()))
    }))
}

/// Posterior weight of every branch after observing `action`.
///
/// Resampling the active component from this posterior keeps the joint law
/// of history and component, which is what makes a mixture of finite-memory
/// strategies itself a finite-memory strategy.
pub fn posterior<T>(branches: &[Branch<T>], action: usize) -> Vec<(&Branch<T>, Rational)> {
    let joint: Vec<(&Branch<T>, Rational)> = branches
        .iter()
        .filter_map(|b| {
            b.choice
                .iter()
                .find(|(a, _)| *a == action)
                .map(|(_, p)| (b, b.weight.clone() * p.clone()))
        })
        .filter(|(_, p)| !p.is_zero())
        .collect();
    let total: Rational = joint.iter().map(|(_, p)| p.clone()).fold(Rational::zero(), |x, y| x + y);
    joint.into_iter().map(|(b, p)| (b, p / total.clone())).collect()
}

/// Tabulates `c` on the (state, mode) pairs reachable from the initial
/// distribution of `m`.
pub fn materialize<C: Controller>(m: &Mdp, c: &C) -> Result<Strategy> {
    materialize_from(m, c, m.init().iter().map(|(v, _)| *v))
}

pub fn materialize_from<C: Controller>(
    m: &Mdp,
    c: &C,
    starts: impl IntoIterator<Item = usize>,
) -> Result<Strategy> {
    let mut ids: BTreeMap<C::Mode, usize> = BTreeMap::new();
    let mut modes: Vec<C::Mode> = Vec::new();
    let mut intern = |mode: &C::Mode, modes: &mut Vec<C::Mode>| -> usize {
        *ids.entry(mode.clone()).or_insert_with(|| {
            modes.push(mode.clone());
            modes.len() - 1
        })
    };

    let init = c.initial_mode();
    let init_id = intern(&init, &mut modes);
    let mut seen: BTreeMap<(usize, usize), ()> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for v in starts {
        if seen.insert((v, init_id), ()).is_none() {
            queue.push_back((v, init_id));
        }
    }

    let mut choices = BTreeMap::new();
    let mut updates = BTreeMap::new();
    while let Some((v, mid)) = queue.pop_front() {
        let mode = modes[mid].clone();
        let choice = c.choice(v, &mode)?;
        for (a, _) in &choice {
            if *a >= m.actions(v).len() {
                return Err(Error::Internal(format!(
                    "controller chose a disabled action at {}",
                    m.name(v)
                )));
            }
            for w in m.action(v, *a).successors() {
                let next = c.update(v, &mode, *a, w)?;
                let mut table = Vec::with_capacity(next.len());
                for (nm, p) in next {
                    let nid = intern(&nm, &mut modes);
                    table.push((nid, p));
                    if seen.insert((w, nid), ()).is_none() {
                        queue.push_back((w, nid));
                    }
                }
                let table = merge_dist(table);
                if !(table.len() == 1 && table[0].0 == mid && table[0].1.is_one()) {
                    updates.insert((v, mid, *a, w), table);
                }
            }
        }
        choices.insert((v, mid), choice);
    }

    // Renumber modes in their natural order for stable output.
    let mut order: Vec<usize> = (0..modes.len()).collect();
    order.sort_by(|&x, &y| modes[x].cmp(&modes[y]));
    let mut rank = vec![0; modes.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let names: Vec<String> = order.iter().map(|&i| c.mode_name(&modes[i])).collect();
    let mut sorted_names = names.clone();
    sorted_names.sort();
    sorted_names.dedup();
    if sorted_names.len() != names.len() {
        return Err(Error::Internal("controller mode names collide".into()));
    }
    let choices = choices
        .into_iter()
        .map(|((v, mid), d)| ((v, rank[mid]), d))
        .collect();
    let updates = updates
        .into_iter()
        .map(|((v, mid, a, w), d): ((usize, usize, usize, usize), Dist<usize>)| {
            let d = merge_dist(d.into_iter().map(|(n, p)| (rank[n], p)));
            ((v, rank[mid], a, w), d)
        })
        .collect();
    Strategy::new(m, names, rank[init_id], choices, updates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    /// Plays `a` until the first visit of `y`, then `b` forever.
    struct SwitchOnce;

    impl Controller for SwitchOnce {
        type Mode = bool;
        fn initial_mode(&self) -> bool {
            false
        }
        fn choice(&self, _: usize, mode: &bool) -> Result<Dist<usize>> {
            Ok(vec![(usize::from(*mode), Rational::one())])
        }
        fn update(&self, _: usize, mode: &bool, _: usize, succ: usize) -> Result<Dist<bool>> {
            Ok(vec![(*mode || succ == 1, Rational::one())])
        }
        fn mode_name(&self, mode: &bool) -> String {
            if *mode { "after" } else { "before" }.into()
        }
    }

    fn loop_mdp() -> Mdp {
        let mut b = Mdp::builder();
        for s in ["x", "y"] {
            b.state(s, Vec::<String>::new());
            b.action(s, "a", [("x", rat(1, 2)), ("y", rat(1, 2))]);
            b.action(s, "b", [(s, int(1))]);
        }
        b.init_state("x");
        b.build().unwrap()
    }

    #[test]
    fn materializes_reachable_pairs() {
        let m = loop_mdp();
        let s = materialize(&m, &SwitchOnce).unwrap();
        assert_eq!(s.modes(), &["before".to_string(), "after".to_string()]);
        assert_eq!(s.initial_mode(), 0);
        // (x, before), (y, after), (x, after) is unreachable: y plays b forever.
        assert_eq!(s.choices().len(), 2);
        assert_eq!(s.next_modes(0, 0, 0, 1), vec![(1, int(1))]);
        assert_eq!(s.next_modes(0, 0, 0, 0), vec![(0, int(1))]);
    }

    #[test]
    fn mixture_posterior() {
        let branches = vec![
            Branch { weight: rat(1, 2), choice: vec![(0, int(1))], tag: 'p' },
            Branch { weight: rat(1, 2), choice: vec![(0, rat(1, 2)), (1, rat(1, 2))], tag: 'q' },
        ];
        assert_eq!(mix_choice(&branches), vec![(0, rat(3, 4)), (1, rat(1, 4))]);
        let post: Vec<(char, Rational)> =
            posterior(&branches, 0).into_iter().map(|(b, p)| (b.tag, p)).collect();
        assert_eq!(post, vec![('p', rat(2, 3)), ('q', rat(1, 3))]);
        let post: Vec<(char, Rational)> =
            posterior(&branches, 1).into_iter().map(|(b, p)| (b.tag, p)).collect();
        assert_eq!(post, vec![('q', int(1))]);
    }
}
