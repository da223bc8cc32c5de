//! Good end components, almost-sure target regions `T_R`, and the strategies
//! `μ_R` that realise them.

use std::collections::BTreeSet;

use num_traits::One;

use crate::automata::ProductMdp;
use crate::error::{Error, Result};
use crate::model::controller::{materialize_from, Controller};
use crate::model::strategy::{uniform, Dist, Strategy};
use crate::qualitative::mec::{maximal_end_components, EndComponent};

/// Maximal end components that, for one choice of acceptance pair per
/// automaton in `r`, avoid every chosen `avoid` set and meet every chosen
/// `repeat` set. Empty `r` yields all maximal end components.
pub fn good_end_components(p: &ProductMdp, r: &[usize]) -> Vec<EndComponent> {
    let n = p.mdp.num_states();
    let mut found: BTreeSet<EndComponent> = BTreeSet::new();
    let radices: Vec<usize> = r.iter().map(|&i| p.automata[i].pairs().len()).collect();
    let mut combo = vec![0usize; r.len()];
    loop {
        let allowed: Vec<bool> = (0..n)
            .map(|v| match &p.keys[v] {
                None => false,
                Some(k) => r.iter().zip(&combo).all(|(&i, &c)| {
                    !p.automata[i].pairs()[c].avoid.contains(&k.aut[i])
                }),
            })
            .collect();
        for ec in maximal_end_components(&p.mdp, &allowed) {
            let good = r.iter().zip(&combo).all(|(&i, &c)| {
                let repeat = &p.automata[i].pairs()[c].repeat;
                ec.states.iter().any(|&v| {
                    p.keys[v].as_ref().is_some_and(|k| repeat.contains(&k.aut[i]))
                })
            });
            if good {
                found.insert(ec);
            }
        }
        // next combination (mixed radix)
        let mut i = 0;
        while i < combo.len() {
            combo[i] += 1;
            if combo[i] < radices[i] {
                break;
            }
            combo[i] = 0;
            i += 1;
        }
        if i == combo.len() {
            break;
        }
    }
    found.into_iter().collect()
}

/// `T_R`: the states from which the controller can reach the union of good
/// end components for `R` with probability 1, plus what `μ_R` needs.
#[derive(Clone, Debug)]
pub struct TargetSet {
    /// Property (automaton) indices, ascending.
    pub subset: Vec<usize>,
    pub states: Vec<bool>,
    /// Good end components, in commitment priority order.
    pub ecs: Vec<EndComponent>,
    /// Actions at members of `states` whose successors all stay in `states`.
    pub safe: Vec<Vec<usize>>,
}

impl TargetSet {
    pub fn contains(&self, v: usize) -> bool {
        self.states[v]
    }

    pub fn is_empty(&self) -> bool {
        !self.states.iter().any(|&b| b)
    }

    /// First good end component containing `v`.
    pub fn ec_of(&self, v: usize) -> Option<usize> {
        self.ecs.iter().position(|ec| ec.contains(v))
    }
}

pub fn compute_target_set(p: &ProductMdp, r: &[usize]) -> TargetSet {
    let mut subset = r.to_vec();
    subset.sort_unstable();
    subset.dedup();
    let ecs = good_end_components(p, &subset);
    let m = &p.mdp;
    let n = m.num_states();
    let mut goal = vec![false; n];
    for ec in &ecs {
        for &v in &ec.states {
            goal[v] = true;
        }
    }
    let preds = m.predecessors();
    let mut win = vec![true; n];
    loop {
        let safe = |v: usize, a: usize, win: &[bool]| m.action(v, a).successors().all(|w| win[w]);
        // Positive reachability of the goal using only safe actions.
        let mut reach: Vec<bool> = (0..n).map(|v| goal[v] && win[v]).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| reach[v]).collect();
        while let Some(w) = stack.pop() {
            for &u in &preds[w] {
                if reach[u] || !win[u] {
                    continue;
                }
                let ok = m.actions(u).iter().enumerate().any(|(a, act)| {
                    act.successors().any(|x| x == w) && safe(u, a, &win)
                });
                if ok {
                    reach[u] = true;
                    stack.push(u);
                }
            }
        }
        if reach == win {
            break;
        }
        win = reach;
    }
    let safe = (0..n)
        .map(|v| {
            if !win[v] {
                return Vec::new();
            }
            (0..m.actions(v).len())
                .filter(|&a| m.action(v, a).successors().all(|w| win[w]))
                .collect()
        })
        .collect();
    TargetSet {
        subset,
        states: win,
        ecs,
        safe,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MuMode {
    /// Heading for a good end component.
    Reach,
    /// Committed to the good end component with this index.
    Stay(usize),
}

/// `μ_R` on the product: plays uniformly over safe actions until it stands
/// in a good end component, then commits to it and plays uniformly over its
/// retained actions forever.
#[derive(Clone, Copy, Debug)]
pub struct Mu<'a> {
    pub target: &'a TargetSet,
}

impl Controller for Mu<'_> {
    type Mode = MuMode;

    fn initial_mode(&self) -> MuMode {
        MuMode::Reach
    }

    fn choice(&self, v: usize, mode: &MuMode) -> Result<Dist<usize>> {
        let t = self.target;
        match mode {
            MuMode::Reach => match t.ec_of(v) {
                Some(c) => Ok(uniform(&t.ecs[c].actions[&v])),
                None if t.contains(v) && !t.safe[v].is_empty() => Ok(uniform(&t.safe[v])),
                None => Err(Error::invalid(format!(
                    "state #{v} lies outside the target region of {:?}",
                    t.subset
                ))),
            },
            MuMode::Stay(c) => t.ecs[*c]
                .actions
                .get(&v)
                .map(|acts| uniform(acts))
                .ok_or_else(|| Error::Internal("committed strategy left its end component".into())),
        }
    }

    fn update(&self, v: usize, mode: &MuMode, _: usize, _: usize) -> Result<Dist<MuMode>> {
        let next = match mode {
            MuMode::Reach => self.target.ec_of(v).map_or(MuMode::Reach, MuMode::Stay),
            stay => stay.clone(),
        };
        Ok(vec![(next, One::one())])
    }

    fn mode_name(&self, mode: &MuMode) -> String {
        match mode {
            MuMode::Reach => "reach".into(),
            MuMode::Stay(c) => format!("ec{c}"),
        }
    }
}

/// Materialized `μ_R` on the product MDP, started from `starts ⊆ T_R`.
pub fn synthesize_mu(p: &ProductMdp, target: &TargetSet, starts: &[usize]) -> Result<Strategy> {
    if let Some(&v) = starts.iter().find(|&&v| !target.contains(v)) {
        return Err(Error::invalid(format!(
            "start state {:?} lies outside the target region",
            p.mdp.name(v)
        )));
    }
    materialize_from(&p.mdp, &Mu { target }, starts.iter().copied())
}
