//! From ω-regular objectives to multi-objective reachability.
//!
//! Every product state that lies in the almost-sure region `T_R` of a
//! maximal nonempty set `R` of properties gets a fresh action `#commit[R]`
//! into an absorbing state `#goal[R]`; property `i` becomes reachability of
//! the goal states whose `R` contains `i`. A strategy of the reduced MDP is
//! turned back into a strategy of the source by replaying it and switching to
//! `μ_R` instead of committing.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::automata::{ProductMdp, Projected};
use crate::error::{Error, Result};
use crate::graph::backward_reachable;
use crate::model::controller::{materialize, mix_choice, posterior, Branch, Controller};
use crate::model::mdp::{Mdp, DEAD_LABEL, DEAD_STATE, LOOP_ACTION};
use crate::model::strategy::{merge_dist, Dist, Strategy};
use crate::num::Rational;
use crate::qualitative::target::{compute_target_set, Mu, MuMode, TargetSet};

/// Largest number of properties the subset construction accepts.
pub const MAX_PROPERTIES: usize = 16;

/// Outcome of removing the states that cannot reach the targets.
#[derive(Clone, Debug)]
pub struct CleanupReport {
    /// Names of the removed states, in the input's order.
    pub removed: Vec<String>,
    pub kept: Mdp,
    /// The sink that receives the mass of removed states, if there is one.
    pub dead: Option<usize>,
    /// Index of each input state in `kept`, `None` when removed.
    pub map: Vec<Option<usize>>,
    /// True when the whole initial distribution sat on removed states, so
    /// only the zero vector is achievable.
    pub init_all_bad: bool,
}

impl CleanupReport {
    /// `set` (over the input's states) translated to `kept`.
    pub fn translate(&self, set: &[bool]) -> Vec<bool> {
        let mut out = vec![false; self.kept.num_states()];
        for (v, &b) in set.iter().enumerate() {
            if let (true, Some(k)) = (b, self.map[v]) {
                out[k] = true;
            }
        }
        out
    }
}

/// Removes every state with no path into `targets` and sends the mass that
/// used to enter them to an explicit [`DEAD_STATE`] sink. A sink of that name
/// already present in `m` is kept, which makes the operation idempotent.
pub fn clean_up(m: &Mdp, targets: &[bool]) -> Result<CleanupReport> {
    let n = m.num_states();
    if targets.len() != n {
        return Err(Error::invalid("target set does not match the state count"));
    }
    if let Some(v) = (0..n).find(|&v| targets[v] && !m.is_absorbing(v)) {
        return Err(Error::invalid(format!("target state {:?} is not absorbing", m.name(v))));
    }
    let good = backward_reachable(n, &m.predecessors(), targets);
    let existing_dead = m.index_of(DEAD_STATE);
    let bad: Vec<bool> = (0..n).map(|v| !good[v] && Some(v) != existing_dead).collect();
    let init_all_bad = m.init().iter().all(|(v, _)| !good[*v]);
    if !bad.iter().any(|&b| b) {
        return Ok(CleanupReport {
            removed: Vec::new(),
            kept: m.clone(),
            dead: existing_dead,
            map: (0..n).map(Some).collect(),
            init_all_bad,
        });
    }

    let target_of = |w: usize| -> String {
        if bad[w] {
            DEAD_STATE.to_string()
        } else {
            m.name(w).to_string()
        }
    };
    let mut b = Mdp::builder();
    for p in m.propositions() {
        b.proposition(p.clone());
    }
    b.proposition(DEAD_LABEL);
    for v in (0..n).filter(|&v| !bad[v] && Some(v) != existing_dead) {
        b.state(m.name(v), m.labels(v).iter().cloned());
        for a in m.actions(v) {
            let ts = merge_by_name(a.transitions.iter().map(|t| (target_of(t.to), t.prob.clone())));
            b.action(m.name(v), a.name.clone(), ts);
        }
    }
    b.state(DEAD_STATE, [DEAD_LABEL]);
    b.action(DEAD_STATE, LOOP_ACTION, [(DEAD_STATE, Rational::one())]);
    b.init_distribution(merge_by_name(
        m.init().iter().map(|(v, p)| (target_of(*v), p.clone())),
    ));
    let kept = b.build()?;
    let map = (0..n)
        .map(|v| if bad[v] { None } else { kept.index_of(m.name(v)) })
        .collect();
    Ok(CleanupReport {
        removed: (0..n).filter(|&v| bad[v]).map(|v| m.name(v).to_string()).collect(),
        dead: kept.index_of(DEAD_STATE),
        kept,
        map,
        init_all_bad,
    })
}

fn merge_by_name(items: impl IntoIterator<Item = (String, Rational)>) -> Vec<(String, Rational)> {
    merge_dist(items)
}

/// Name of the absorbing state added for property set `r`.
pub fn goal_name(r: &[usize]) -> String {
    format!("#goal[{}]", join(r))
}

/// Name of the action that commits to property set `r`.
pub fn commit_name(r: &[usize]) -> String {
    format!("#commit[{}]", join(r))
}

fn join(r: &[usize]) -> String {
    r.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

/// The reduced reachability MDP together with what is needed to lift its
/// strategies.
#[derive(Clone, Debug)]
pub struct ReducedMdp {
    pub mdp: Mdp,
    /// Reduced index of every product state.
    pub from_product: Vec<usize>,
    /// `F_i`, one per property.
    pub targets: Vec<Vec<bool>>,
    /// Property sets that received a goal state, with their regions.
    pub regions: Vec<TargetSet>,
    /// Commit action name → index into `regions`.
    pub commits: BTreeMap<String, usize>,
}

impl ReducedMdp {
    /// Union of all `F_i`.
    pub fn all_targets(&self) -> Vec<bool> {
        (0..self.mdp.num_states())
            .map(|v| self.targets.iter().any(|t| t[v]))
            .collect()
    }
}

/// Builds the reduced MDP for properties `0..k` of the product, where `k` is
/// the number of automata in `p`.
pub fn build_reduction(p: &ProductMdp) -> Result<ReducedMdp> {
    let k = p.automata.len();
    if k > MAX_PROPERTIES {
        return Err(Error::CapExceeded {
            what: "properties in the subset construction".into(),
            limit: MAX_PROPERTIES as u64,
        });
    }
    let subsets: Vec<Vec<usize>> = (1u32..(1u32 << k))
        .map(|mask| (0..k).filter(|i| mask & (1 << i) != 0).collect())
        .collect();
    let regions: Vec<TargetSet> = subsets.par_iter().map(|r| compute_target_set(p, r)).collect();
    build_reduction_with(p, regions)
}

/// Same as [`build_reduction`] with precomputed regions for the nonempty
/// property sets (any order; sets absent from `regions` are treated as
/// having an empty region).
pub fn build_reduction_with(p: &ProductMdp, regions: Vec<TargetSet>) -> Result<ReducedMdp> {
    let m = &p.mdp;
    let n = m.num_states();
    let k = p.automata.len();
    let sets: Vec<BTreeSet<usize>> = regions.iter().map(|t| t.subset.iter().copied().collect()).collect();

    // Maximal sets per state.
    let mut commits_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (v, slot) in commits_at.iter_mut().enumerate() {
        let holding: Vec<usize> = (0..regions.len()).filter(|&j| regions[j].contains(v)).collect();
        for &j in &holding {
            let dominated = holding
                .iter()
                .any(|&o| o != j && sets[j].is_subset(&sets[o]) && sets[j] != sets[o]);
            if !dominated {
                slot.push(j);
            }
        }
    }
    let used: BTreeSet<usize> = commits_at.iter().flatten().copied().collect();

    let mut b = m.to_builder();
    b.init_state(m.name(p.init));
    for &j in &used {
        let goal = goal_name(&regions[j].subset);
        b.state(goal.clone(), Vec::<String>::new());
        b.action(goal.clone(), LOOP_ACTION, [(goal, Rational::one())]);
    }
    for (v, js) in commits_at.iter().enumerate() {
        for &j in js {
            b.action(
                m.name(v),
                commit_name(&regions[j].subset),
                [(goal_name(&regions[j].subset), Rational::one())],
            );
        }
    }
    let mdp = b.build()?;

    let from_product = (0..n).map(|v| mdp.require_state(m.name(v))).collect::<Result<Vec<_>>>()?;
    let mut targets = vec![vec![false; mdp.num_states()]; k];
    let mut commits = BTreeMap::new();
    let mut kept_regions = Vec::with_capacity(used.len());
    for &j in &used {
        let g = mdp.require_state(&goal_name(&regions[j].subset))?;
        for &i in &regions[j].subset {
            targets[i][g] = true;
        }
        commits.insert(commit_name(&regions[j].subset), kept_regions.len());
        kept_regions.push(regions[j].clone());
    }
    Ok(ReducedMdp {
        mdp,
        from_product,
        targets,
        regions: kept_regions,
        commits,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LiftMode {
    Replay,
    Mu(usize, MuMode),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum LiftTag {
    Replay,
    Commit(usize),
}

/// Replays a memoryless strategy of the cleaned-up reduced MDP on the
/// product, running `μ_R` wherever it would commit to `R`.
pub struct Lifted<'a> {
    pub product: &'a ProductMdp,
    pub reduced: &'a ReducedMdp,
    pub cleanup: &'a CleanupReport,
    pub sigma: &'a Strategy,
}

impl Lifted<'_> {
    fn branches(&self, u: usize) -> Result<Vec<Branch<LiftTag>>> {
        let kept = &self.cleanup.kept;
        let Some(k) = self.cleanup.map[self.reduced.from_product[u]] else {
            // Removed states never reach a target again; any action will do.
            return Ok(vec![Branch {
                weight: Rational::one(),
                choice: vec![(0, Rational::one())],
                tag: LiftTag::Replay,
            }]);
        };
        let choice = self
            .sigma
            .choice(k, self.sigma.initial_mode())
            .ok_or_else(|| Error::invalid(format!("strategy has no choice at {:?}", kept.name(k))))?;
        let mut replay = Vec::new();
        let mut out = Vec::new();
        for (a, p) in choice {
            let name = &kept.action(k, *a).name;
            if let Some(&j) = self.reduced.commits.get(name) {
                let mu = Mu { target: &self.reduced.regions[j] };
                out.push(Branch {
                    weight: p.clone(),
                    choice: mu.choice(u, &MuMode::Reach)?,
                    tag: LiftTag::Commit(j),
                });
            } else {
                let b = self.product.mdp.require_action(u, name)?;
                replay.push((b, p.clone()));
            }
        }
        let mass: Rational = replay.iter().map(|(_, p)| p.clone()).sum();
        if !mass.is_zero() {
            out.insert(
                0,
                Branch {
                    choice: replay.into_iter().map(|(b, p)| (b, p / mass.clone())).collect(),
                    weight: mass,
                    tag: LiftTag::Replay,
                },
            );
        }
        Ok(out)
    }
}

impl Controller for Lifted<'_> {
    type Mode = LiftMode;

    fn initial_mode(&self) -> LiftMode {
        LiftMode::Replay
    }

    fn choice(&self, u: usize, mode: &LiftMode) -> Result<Dist<usize>> {
        match mode {
            LiftMode::Replay => Ok(mix_choice(&self.branches(u)?)),
            LiftMode::Mu(j, mm) => Mu { target: &self.reduced.regions[*j] }.choice(u, mm),
        }
    }

    fn update(&self, u: usize, mode: &LiftMode, a: usize, w: usize) -> Result<Dist<LiftMode>> {
        match mode {
            LiftMode::Replay => {
                let branches = self.branches(u)?;
                let mut out = Vec::new();
                for (b, p) in posterior(&branches, a) {
                    match b.tag {
                        LiftTag::Replay => out.push((LiftMode::Replay, p)),
                        LiftTag::Commit(j) => {
                            let mu = Mu { target: &self.reduced.regions[j] };
                            for (mm, q) in mu.update(u, &MuMode::Reach, a, w)? {
                                out.push((LiftMode::Mu(j, mm), p.clone() * q));
                            }
                        }
                    }
                }
                Ok(merge_dist(out))
            }
            LiftMode::Mu(j, mm) => Ok(Mu { target: &self.reduced.regions[*j] }
                .update(u, mm, a, w)?
                .into_iter()
                .map(|(m, p)| (LiftMode::Mu(*j, m), p))
                .collect()),
        }
    }

    fn mode_name(&self, mode: &LiftMode) -> String {
        match mode {
            LiftMode::Replay => "replay".into(),
            LiftMode::Mu(j, mm) => format!(
                "{}:{}",
                join(&self.reduced.regions[*j].subset),
                Mu { target: &self.reduced.regions[*j] }.mode_name(mm)
            ),
        }
    }
}

/// Lifts a memoryless strategy of `cleanup.kept` (the cleaned-up reduced
/// MDP) to a finite-memory strategy of `source`.
pub fn lift_strategy(
    source: &Mdp,
    product: &ProductMdp,
    reduced: &ReducedMdp,
    cleanup: &CleanupReport,
    sigma: &Strategy,
) -> Result<Strategy> {
    if !sigma.is_memoryless() {
        return Err(Error::invalid("only memoryless strategies of the reduced MDP can be lifted"));
    }
    let lifted = Lifted { product, reduced, cleanup, sigma };
    materialize(source, &Projected::new(source, product, &lifted))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automata::{product, RabinAutomaton};
    use crate::num::{int, rat};

    fn leaky() -> Mdp {
        let mut b = Mdp::builder();
        b.state("s", Vec::<String>::new())
            .state("goal", ["G"])
            .state("trap", Vec::<String>::new())
            .state("loop", Vec::<String>::new())
            .action("s", "a", [("goal", rat(1, 2)), ("trap", rat(1, 2))])
            .action("s", "b", [("loop", int(1))])
            .action("goal", "stay", [("goal", int(1))])
            .action("trap", "stay", [("trap", int(1))])
            .action("loop", "spin", [("loop", int(1))])
            .init_state("s");
        b.build().unwrap()
    }

    #[test]
    fn clean_up_redirects_to_dead_and_is_idempotent() {
        let m = leaky();
        let f = m.label_set("G");
        let r = clean_up(&m, &f).unwrap();
        assert_eq!(r.removed, vec!["loop".to_string(), "trap".to_string()]);
        let dead = r.dead.unwrap();
        let s = r.kept.require_state("s").unwrap();
        assert_eq!(r.kept.action(s, 0).prob_to(dead), rat(1, 2));
        assert_eq!(r.kept.action(s, 1).prob_to(dead), int(1));
        assert!(!r.init_all_bad);

        let again = clean_up(&r.kept, &r.translate(&f)).unwrap();
        assert!(again.removed.is_empty());
        assert_eq!(again.kept, r.kept);
    }

    #[test]
    fn clean_up_without_bad_states_is_identity() {
        let mut b = Mdp::builder();
        b.state("u", Vec::<String>::new())
            .state("g", ["G"])
            .action("u", "go", [("g", int(1))])
            .action("g", "stay", [("g", int(1))])
            .init_state("u");
        let m = b.build().unwrap();
        let r = clean_up(&m, &m.label_set("G")).unwrap();
        assert!(r.removed.is_empty());
        assert_eq!(r.kept, m);
        assert!(r.dead.is_none());
    }

    #[test]
    fn unreachable_property_adds_no_goal() {
        let m = leaky().to_builder().proposition("Z").build().unwrap();
        let p = product(&m, &[RabinAutomaton::reach("Z")]).unwrap();
        let red = build_reduction(&p).unwrap();
        assert!(red.regions.is_empty());
        assert_eq!(red.mdp.num_states(), p.mdp.num_states());
    }

    #[test]
    fn goal_states_are_absorbing_and_bounded() {
        let m = leaky();
        let auts = [RabinAutomaton::reach("G"), RabinAutomaton::avoid("G")];
        let p = product(&m, &auts).unwrap();
        let red = build_reduction(&p).unwrap();
        assert!(red.regions.len() <= 3);
        for (v, &t) in red.all_targets().iter().enumerate() {
            if t {
                assert_eq!(red.mdp.actions(v).len(), 1);
                assert!(red.mdp.is_absorbing(v));
            }
        }
    }
}
