//! Decision procedure for queries of the form "every φ in Φ holds almost
//! surely and every ψ in Ψ holds with positive probability".

use num_traits::One;
use rayon::prelude::*;

use crate::automata::{product, ProductMdp, Projected, RabinAutomaton};
use crate::error::{Error, Result};
use crate::graph::{backward_reachable, forward_reachable};
use crate::model::controller::{materialize, mix_choice, posterior, Branch, Controller};
use crate::model::strategy::{merge_dist, uniform, Dist, Strategy};
use crate::model::Mdp;
use crate::num::{rat, Rational};
use crate::qualitative::target::{compute_target_set, Mu, MuMode, TargetSet};

/// Indices into the automaton list handed to [`decide_qualitative`].
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct QualitativeQuery {
    /// Must hold with probability 1.
    pub sure: Vec<usize>,
    /// Must hold with positive probability.
    pub positive: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct QualitativeOutcome {
    pub satisfiable: bool,
    /// Witness on the source MDP when satisfiable.
    pub strategy: Option<Strategy>,
    /// Number of product states, and how many survive pruning.
    pub product_states: usize,
    pub surviving_states: usize,
}

/// Pruned product: the states that are not bad, with their surviving actions.
#[derive(Clone, Debug)]
pub struct Pruned {
    pub alive: Vec<bool>,
    pub actions: Vec<Vec<usize>>,
}

/// Repeatedly marks as bad every state that cannot reach `target` in the
/// current graph, removes actions that may enter a bad state, and marks
/// states without actions as bad; finally restricts to states reachable from
/// the initial state.
pub fn prune(m: &Mdp, init: usize, target: &[bool]) -> Pruned {
    let n = m.num_states();
    let mut alive = vec![true; n];
    let mut enabled: Vec<Vec<bool>> = (0..n).map(|v| vec![true; m.actions(v).len()]).collect();
    loop {
        let mut changed = false;
        let mut preds = vec![Vec::new(); n];
        for v in (0..n).filter(|&v| alive[v]) {
            for (a, act) in m.actions(v).iter().enumerate() {
                if enabled[v][a] {
                    for w in act.successors() {
                        preds[w].push(v);
                    }
                }
            }
        }
        let goal: Vec<bool> = (0..n).map(|v| alive[v] && target[v]).collect();
        let can = backward_reachable(n, &preds, &goal);
        for v in 0..n {
            if alive[v] && !can[v] {
                alive[v] = false;
                changed = true;
            }
        }
        for v in 0..n {
            if !alive[v] {
                continue;
            }
            for (a, act) in m.actions(v).iter().enumerate() {
                if enabled[v][a] && act.successors().any(|w| !alive[w]) {
                    enabled[v][a] = false;
                    changed = true;
                }
            }
            if !enabled[v].iter().any(|&e| e) {
                alive[v] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let reachable = if alive[init] {
        forward_reachable(n, &[init], |v| {
            m.actions(v)
                .iter()
                .enumerate()
                .filter(|(a, _)| enabled[v][*a])
                .flat_map(|(_, act)| act.successors())
                .collect()
        })
    } else {
        vec![false; n]
    };
    let alive: Vec<bool> = (0..n).map(|v| alive[v] && reachable[v]).collect();
    let actions = (0..n)
        .map(|v| {
            if alive[v] {
                (0..m.actions(v).len()).filter(|&a| enabled[v][a]).collect()
            } else {
                Vec::new()
            }
        })
        .collect();
    Pruned { alive, actions }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhaseMode {
    Explore,
    /// Switched to the option with this index, running its `μ` in the mode.
    Commit(usize, MuMode),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tag {
    Continue,
    Switch(usize),
}

/// The two-phase witness on the product. Phase one wanders uniformly inside
/// the pruned product; at target states it switches to one of the
/// applicable `μ` strategies. When a state lies in every target region that
/// phase two may need, it switches with probability 1; otherwise with
/// probability 1/2, split uniformly among the applicable options.
pub struct TwoPhase<'a> {
    pub pruned: &'a Pruned,
    /// Targets for `Φ ∪ {ψ_i}`, one per ψ, followed by `T_Φ` when Φ ≠ ∅.
    pub options: Vec<&'a TargetSet>,
    /// Options that must all be available at a state for a full switch.
    pub required: Vec<usize>,
}

impl TwoPhase<'_> {
    fn branches(&self, v: usize) -> Result<Vec<Branch<Tag>>> {
        let applicable: Vec<usize> = (0..self.options.len())
            .filter(|&o| self.options[o].contains(v))
            .collect();
        let full = !self.required.is_empty()
            && self.required.iter().all(|o| applicable.contains(o));
        let mut out = Vec::new();
        let (switch_mass, chosen) = if full {
            (Rational::one(), self.required.clone())
        } else if applicable.is_empty() {
            (Rational::from_integer(0.into()), Vec::new())
        } else {
            (rat(1, 2), applicable)
        };
        let stay_mass = Rational::one() - switch_mass.clone();
        if stay_mass > Rational::from_integer(0.into()) {
            if self.pruned.actions[v].is_empty() {
                return Err(Error::Internal("phase one reached a pruned state".into()));
            }
            out.push(Branch {
                weight: stay_mass,
                choice: uniform(&self.pruned.actions[v]),
                tag: Tag::Continue,
            });
        }
        let share = switch_mass / Rational::from_integer((chosen.len().max(1) as i64).into());
        for o in chosen {
            out.push(Branch {
                weight: share.clone(),
                choice: Mu { target: self.options[o] }.choice(v, &MuMode::Reach)?,
                tag: Tag::Switch(o),
            });
        }
        Ok(out)
    }
}

impl Controller for TwoPhase<'_> {
    type Mode = PhaseMode;

    fn initial_mode(&self) -> PhaseMode {
        PhaseMode::Explore
    }

    fn choice(&self, v: usize, mode: &PhaseMode) -> Result<Dist<usize>> {
        match mode {
            PhaseMode::Explore => Ok(mix_choice(&self.branches(v)?)),
            PhaseMode::Commit(o, mm) => Mu { target: self.options[*o] }.choice(v, mm),
        }
    }

    fn update(&self, v: usize, mode: &PhaseMode, a: usize, w: usize) -> Result<Dist<PhaseMode>> {
        match mode {
            PhaseMode::Explore => {
                let branches = self.branches(v)?;
                let mut out = Vec::new();
                for (b, p) in posterior(&branches, a) {
                    match b.tag {
                        Tag::Continue => out.push((PhaseMode::Explore, p)),
                        Tag::Switch(o) => {
                            let mu = Mu { target: self.options[o] };
                            for (mm, q) in mu.update(v, &MuMode::Reach, a, w)? {
                                out.push((PhaseMode::Commit(o, mm), p.clone() * q));
                            }
                        }
                    }
                }
                Ok(merge_dist(out))
            }
            PhaseMode::Commit(o, mm) => Ok(Mu { target: self.options[*o] }
                .update(v, mm, a, w)?
                .into_iter()
                .map(|(m, p)| (PhaseMode::Commit(*o, m), p))
                .collect()),
        }
    }

    fn mode_name(&self, mode: &PhaseMode) -> String {
        match mode {
            PhaseMode::Explore => "explore".into(),
            PhaseMode::Commit(o, mm) => {
                format!("opt{o}:{}", Mu { target: self.options[*o] }.mode_name(mm))
            }
        }
    }
}

/// Result of running the decision procedure on a prepared product.
pub struct ProductDecision {
    pub satisfiable: bool,
    pub pruned: Pruned,
    pub targets: Vec<TargetSet>,
    pub required: Vec<usize>,
}

/// Steps 2–5 on an existing product whose automata are indexed by `q`.
pub fn decide_on_product(p: &ProductMdp, q: &QualitativeQuery) -> ProductDecision {
    let mut sets: Vec<Vec<usize>> = q
        .positive
        .iter()
        .map(|&psi| {
            let mut r = q.sure.clone();
            r.push(psi);
            r
        })
        .collect();
    let has_sure = !q.sure.is_empty();
    sets.push(q.sure.clone());
    let targets: Vec<TargetSet> = sets.par_iter().map(|r| compute_target_set(p, r)).collect();
    let t_phi = targets.last().expect("T_Φ is always computed");
    let pruned = if has_sure {
        prune(&p.mdp, p.init, &t_phi.states)
    } else {
        prune(&p.mdp, p.init, &vec![true; p.mdp.num_states()])
    };
    let nonempty = pruned.alive.iter().any(|&a| a);
    let covers = (0..q.positive.len())
        .all(|i| (0..p.mdp.num_states()).any(|v| pruned.alive[v] && targets[i].contains(v)));
    let required: Vec<usize> = if q.positive.is_empty() {
        if has_sure {
            vec![targets.len() - 1]
        } else {
            Vec::new()
        }
    } else {
        (0..q.positive.len()).collect()
    };
    ProductDecision {
        satisfiable: nonempty && covers,
        pruned,
        targets,
        required,
    }
}

/// Decides the query over `m` with the given automata and, when it holds,
/// returns the two-phase witness projected to `m`.
pub fn decide_qualitative(
    m: &Mdp,
    automata: &[RabinAutomaton],
    q: &QualitativeQuery,
) -> Result<QualitativeOutcome> {
    if let Some(&i) = q.sure.iter().chain(&q.positive).find(|&&i| i >= automata.len()) {
        return Err(Error::invalid(format!("property index {i} is out of range")));
    }
    let p = product(m, automata)?;
    let d = decide_on_product(&p, q);
    let surviving = d.pruned.alive.iter().filter(|&&a| a).count();
    if !d.satisfiable {
        return Ok(QualitativeOutcome {
            satisfiable: false,
            strategy: None,
            product_states: p.mdp.num_states(),
            surviving_states: surviving,
        });
    }
    let mut options: Vec<&TargetSet> = d.targets[..q.positive.len()].iter().collect();
    if !q.sure.is_empty() {
        options.push(d.targets.last().expect("T_Φ"));
    }
    let two_phase = TwoPhase {
        pruned: &d.pruned,
        options,
        required: d.required.clone(),
    };
    let projected = Projected::new(m, &p, &two_phase);
    let strategy = materialize(m, &projected)?;
    Ok(QualitativeOutcome {
        satisfiable: true,
        strategy: Some(strategy),
        product_states: p.mdp.num_states(),
        surviving_states: surviving,
    })
}
