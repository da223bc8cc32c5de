use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::format::{json_error, Prob};
use crate::model::mdp::Mdp;
use crate::num::{format_rational, Rational};

/// Finite-support probability distribution, sorted by key.
pub type Dist<T> = Vec<(T, Rational)>;

/// Sums duplicate keys, drops zero mass, sorts by key.
pub fn merge_dist<T: Ord>(items: impl IntoIterator<Item = (T, Rational)>) -> Dist<T> {
    let mut acc: BTreeMap<T, Rational> = BTreeMap::new();
    for (k, p) in items {
        *acc.entry(k).or_insert_with(Rational::zero) += p;
    }
    acc.into_iter().filter(|(_, p)| !p.is_zero()).collect()
}

/// Uniform distribution over the given keys (which must be distinct).
pub fn uniform<T: Ord + Clone>(keys: &[T]) -> Dist<T> {
    let n = keys.len() as i64;
    merge_dist(keys.iter().map(|k| (k.clone(), crate::num::rat(1, n))))
}

fn check_dist<T: Ord>(d: &Dist<T>, what: impl Fn() -> String) -> Result<()> {
    if d.is_empty() {
        return Err(Error::invalid(format!("{} is empty", what())));
    }
    let mut total = Rational::zero();
    for (_, p) in d {
        if *p <= Rational::zero() {
            return Err(Error::invalid(format!("{} has a non-positive entry", what())));
        }
        total += p;
    }
    if d.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(Error::invalid(format!("{} is not sorted or repeats an entry", what())));
    }
    if !total.is_one() {
        return Err(Error::invalid(format!(
            "{} does not sum to 1 (sum is {})",
            what(),
            format_rational(&total)
        )));
    }
    Ok(())
}

/// A randomized finite-memory strategy; memoryless strategies have a single
/// mode and no updates.
///
/// Actions are indices into the owning MDP's per-state action lists. A
/// missing update entry means the mode is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    modes: Vec<String>,
    initial_mode: usize,
    choices: BTreeMap<(usize, usize), Dist<usize>>,
    updates: BTreeMap<(usize, usize, usize, usize), Dist<usize>>,
}

impl Strategy {
    pub fn new(
        m: &Mdp,
        modes: Vec<String>,
        initial_mode: usize,
        choices: BTreeMap<(usize, usize), Dist<usize>>,
        updates: BTreeMap<(usize, usize, usize, usize), Dist<usize>>,
    ) -> Result<Strategy> {
        if modes.is_empty() {
            return Err(Error::invalid("strategy has no modes"));
        }
        if initial_mode >= modes.len() {
            return Err(Error::invalid("initial mode out of range"));
        }
        if modes.iter().collect::<BTreeSet<_>>().len() != modes.len() {
            return Err(Error::invalid("strategy mode names are not distinct"));
        }
        for (&(v, mode), d) in &choices {
            if v >= m.num_states() || mode >= modes.len() {
                return Err(Error::invalid("strategy choice refers to an unknown state or mode"));
            }
            check_dist(d, || format!("choice at state {:?}, mode {:?}", m.name(v), modes[mode]))?;
            if d.iter().any(|(a, _)| *a >= m.actions(v).len()) {
                return Err(Error::invalid(format!(
                    "choice at state {:?} uses an action that is not enabled",
                    m.name(v)
                )));
            }
        }
        for (&(v, mode, a, w), d) in &updates {
            if v >= m.num_states() || mode >= modes.len() || a >= m.actions(v).len() {
                return Err(Error::invalid("strategy update refers to an unknown state, mode, or action"));
            }
            if !m.action(v, a).successors().any(|x| x == w) {
                return Err(Error::invalid(format!(
                    "update at state {:?} names {:?}, which is not a successor of action {:?}",
                    m.name(v),
                    m.states().get(w).map_or("?", |s| s.name.as_str()),
                    m.action(v, a).name
                )));
            }
            check_dist(d, || format!("mode update at state {:?}", m.name(v)))?;
            if d.iter().any(|(n, _)| *n >= modes.len()) {
                return Err(Error::invalid("mode update targets an unknown mode"));
            }
        }
        Ok(Strategy {
            modes,
            initial_mode,
            choices,
            updates,
        })
    }

    /// Memoryless strategy from one action distribution per state.
    pub fn memoryless(m: &Mdp, choice: Vec<Dist<usize>>) -> Result<Strategy> {
        if choice.len() != m.num_states() {
            return Err(Error::invalid("memoryless strategy must choose at every state"));
        }
        let choices = choice.into_iter().enumerate().map(|(v, d)| ((v, 0), d)).collect();
        Strategy::new(m, vec!["0".into()], 0, choices, BTreeMap::new())
    }

    /// Pure memoryless strategy playing `actions[v]` at `v`.
    pub fn pure(m: &Mdp, actions: &[usize]) -> Result<Strategy> {
        Strategy::memoryless(m, actions.iter().map(|&a| vec![(a, Rational::one())]).collect())
    }

    /// Plays the lexicographically least action everywhere.
    pub fn default_pure(m: &Mdp) -> Strategy {
        Strategy::pure(m, &vec![0; m.num_states()]).expect("action 0 is always enabled")
    }

    pub fn modes(&self) -> &[String] {
        &self.modes
    }

    pub fn initial_mode(&self) -> usize {
        self.initial_mode
    }

    pub fn is_memoryless(&self) -> bool {
        self.modes.len() == 1 && self.updates.is_empty()
    }

    pub fn choice(&self, v: usize, mode: usize) -> Option<&Dist<usize>> {
        self.choices.get(&(v, mode))
    }

    pub fn choices(&self) -> &BTreeMap<(usize, usize), Dist<usize>> {
        &self.choices
    }

    pub fn updates(&self) -> &BTreeMap<(usize, usize, usize, usize), Dist<usize>> {
        &self.updates
    }

    pub fn next_modes(&self, v: usize, mode: usize, a: usize, w: usize) -> Dist<usize> {
        self.updates
            .get(&(v, mode, a, w))
            .cloned()
            .unwrap_or_else(|| vec![(mode, Rational::one())])
    }

    /// Is the action distribution at every defined (state, mode) a point mass?
    pub fn is_pure(&self) -> bool {
        self.choices.values().all(|d| d.len() == 1)
            && self.updates.values().all(|d| d.len() == 1)
    }

    pub fn to_json(&self, m: &Mdp) -> String {
        let file = StrategyFile {
            modes: self.modes.clone(),
            initial_mode: self.modes[self.initial_mode].clone(),
            choices: self
                .choices
                .iter()
                .flat_map(|(&(v, mode), d)| {
                    d.iter().map(move |(a, p)| ChoiceEntry {
                        state: m.name(v).to_string(),
                        mode: self.modes[mode].clone(),
                        action: m.action(v, *a).name.clone(),
                        prob: Prob(p.clone()),
                    })
                })
                .collect(),
            updates: self
                .updates
                .iter()
                .flat_map(|(&(v, mode, a, w), d)| {
                    d.iter().map(move |(n, p)| UpdateEntry {
                        state: m.name(v).to_string(),
                        mode: self.modes[mode].clone(),
                        action: m.action(v, a).name.clone(),
                        to: m.name(w).to_string(),
                        next_mode: self.modes[*n].clone(),
                        prob: Prob(p.clone()),
                    })
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("strategy serialization cannot fail") + "\n"
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StrategyFile {
    #[serde(default = "default_modes")]
    modes: Vec<String>,
    #[serde(default = "default_mode")]
    initial_mode: String,
    choices: Vec<ChoiceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    updates: Vec<UpdateEntry>,
}

fn default_modes() -> Vec<String> {
    vec!["0".into()]
}

fn default_mode() -> String {
    "0".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChoiceEntry {
    state: String,
    #[serde(default = "default_mode")]
    mode: String,
    action: String,
    prob: Prob,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct UpdateEntry {
    state: String,
    mode: String,
    action: String,
    to: String,
    next_mode: String,
    prob: Prob,
}

/// Reads a strategy file against the MDP it controls.
pub fn parse_strategy(text: &str, m: &Mdp) -> Result<Strategy> {
    let file: StrategyFile = serde_json::from_str(text).map_err(json_error)?;
    let mode_ix = |name: &str| -> Result<usize> {
        file.modes
            .iter()
            .position(|x| x == name)
            .ok_or_else(|| Error::unknown("mode", name))
    };
    let initial = mode_ix(&file.initial_mode)?;
    let mut choices: BTreeMap<(usize, usize), Vec<(usize, Rational)>> = BTreeMap::new();
    for c in &file.choices {
        let v = m.require_state(&c.state)?;
        let a = m.require_action(v, &c.action)?;
        choices
            .entry((v, mode_ix(&c.mode)?))
            .or_default()
            .push((a, c.prob.0.clone()));
    }
    let mut updates: BTreeMap<(usize, usize, usize, usize), Vec<(usize, Rational)>> =
        BTreeMap::new();
    for u in &file.updates {
        let v = m.require_state(&u.state)?;
        let a = m.require_action(v, &u.action)?;
        let w = m.require_state(&u.to)?;
        updates
            .entry((v, mode_ix(&u.mode)?, a, w))
            .or_default()
            .push((mode_ix(&u.next_mode)?, u.prob.0.clone()));
    }
    let sort = |mut d: Vec<(usize, Rational)>| {
        d.sort_by_key(|(k, _)| *k);
        d
    };
    let choices = choices.into_iter().map(|(k, d)| (k, sort(d))).collect();
    let updates = updates.into_iter().map(|(k, d)| (k, sort(d))).collect();
    Strategy::new(m, file.modes.clone(), initial, choices, updates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn two_states() -> Mdp {
        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new())
            .state("y", ["P"])
            .action("x", "a", [("y", int(1))])
            .action("x", "b", [("x", int(1))])
            .action("y", "c", [("x", rat(1, 2)), ("y", rat(1, 2))])
            .init_state("x");
        b.build().unwrap()
    }

    #[test]
    fn memoryless_round_trip() {
        let m = two_states();
        let s = Strategy::memoryless(
            &m,
            vec![vec![(0, rat(1, 3)), (1, rat(2, 3))], vec![(0, int(1))]],
        )
        .unwrap();
        assert!(s.is_memoryless());
        assert!(!s.is_pure());
        let text = s.to_json(&m);
        assert_eq!(parse_strategy(&text, &m).unwrap(), s);
    }

    #[test]
    fn finite_memory_round_trip() {
        let m = two_states();
        let mut choices = BTreeMap::new();
        choices.insert((0, 0), vec![(0, int(1))]);
        choices.insert((1, 0), vec![(0, int(1))]);
        choices.insert((0, 1), vec![(1, int(1))]);
        let mut updates = BTreeMap::new();
        updates.insert((1, 0, 0, 0), vec![(0, rat(1, 2)), (1, rat(1, 2))]);
        let s = Strategy::new(&m, vec!["go".into(), "stop".into()], 0, choices, updates).unwrap();
        assert!(!s.is_memoryless());
        assert_eq!(s.next_modes(1, 0, 0, 1), vec![(0, int(1))]);
        let text = s.to_json(&m);
        assert_eq!(parse_strategy(&text, &m).unwrap(), s);
    }

    #[test]
    fn rejects_malformed() {
        let m = two_states();
        assert!(Strategy::memoryless(&m, vec![vec![(0, rat(1, 2))], vec![(0, int(1))]]).is_err());
        assert!(Strategy::memoryless(&m, vec![vec![(5, int(1))], vec![(0, int(1))]]).is_err());
        let mut updates = BTreeMap::new();
        // action a at x only leads to y
        updates.insert((0, 0, 0, 0), vec![(0, int(1))]);
        let mut choices = BTreeMap::new();
        choices.insert((0, 0), vec![(0, int(1))]);
        assert!(Strategy::new(&m, vec!["0".into()], 0, choices, updates).is_err());
        let text = r#"{"choices": [{"state": "x", "action": "zzz", "prob": 1}]}"#;
        assert!(parse_strategy(text, &m).is_err());
    }

    #[test]
    fn dist_helpers() {
        let d = merge_dist(vec![(2, rat(1, 4)), (1, rat(1, 4)), (2, rat(1, 2)), (3, int(0))]);
        assert_eq!(d, vec![(1, rat(1, 4)), (2, rat(3, 4))]);
        assert_eq!(uniform(&[5, 7]), vec![(5, rat(1, 2)), (7, rat(1, 2))]);
    }
}
