use std::collections::BTreeMap;

use crate::graph::tarjan_scc;
use crate::model::Mdp;

/// A set of states with, per state, a nonempty set of actions whose
/// successors all stay inside; strongly connected under those actions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct EndComponent {
    /// Ascending.
    pub states: Vec<usize>,
    /// Retained actions per member state, ascending.
    pub actions: BTreeMap<usize, Vec<usize>>,
}

impl EndComponent {
    pub fn contains(&self, v: usize) -> bool {
        self.states.binary_search(&v).is_ok()
    }
}

/// Maximal end components of the sub-MDP induced by `allowed` states.
pub fn maximal_end_components(m: &Mdp, allowed: &[bool]) -> Vec<EndComponent> {
    let actions: Vec<Vec<bool>> = (0..m.num_states())
        .map(|v| vec![allowed[v]; m.actions(v).len()])
        .collect();
    maximal_end_components_with(m, allowed, actions)
}

/// Maximal end components using only the `enabled` actions of `allowed`
/// states, by iterated SCC refinement: drop actions that can leave their
/// SCC, drop states left without actions, recompute, until stable.
pub fn maximal_end_components_with(
    m: &Mdp,
    allowed: &[bool],
    mut enabled: Vec<Vec<bool>>,
) -> Vec<EndComponent> {
    let n = m.num_states();
    let mut alive = allowed.to_vec();
    let succ = |v: usize, alive: &[bool], enabled: &[Vec<bool>]| -> Vec<usize> {
        let mut out: Vec<usize> = m
            .actions(v)
            .iter()
            .enumerate()
            .filter(|(a, _)| enabled[v][*a])
            .flat_map(|(_, act)| act.successors())
            .filter(|w| alive[*w])
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    loop {
        let mut changed = false;
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            if !enabled[v].iter().any(|&e| e) {
                alive[v] = false;
                changed = true;
            }
        }
        let sccs = tarjan_scc(n, &alive, |v| succ(v, &alive, &enabled));
        let mut comp = vec![usize::MAX; n];
        for (c, states) in sccs.iter().enumerate() {
            for &v in states {
                comp[v] = c;
            }
        }
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            for (a, act) in m.actions(v).iter().enumerate() {
                if enabled[v][a] && act.successors().any(|w| !alive[w] || comp[w] != comp[v]) {
                    enabled[v][a] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            let mut out: Vec<EndComponent> = sccs
                .into_iter()
                .map(|states| {
                    let actions = states
                        .iter()
                        .map(|&v| {
                            let acts = (0..m.actions(v).len()).filter(|&a| enabled[v][a]).collect();
                            (v, acts)
                        })
                        .collect();
                    EndComponent { states, actions }
                })
                .collect();
            out.sort();
            return out;
        }
    }
}
