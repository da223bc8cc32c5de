use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::num::{format_rational, Rational};

/// Name of the explicit sink that absorbs probability mass leaving the
/// modelled part of a system.
pub const DEAD_STATE: &str = "#dead";
/// Label carried by [`DEAD_STATE`].
pub const DEAD_LABEL: &str = "dead";
/// Self-loop action of generated absorbing states.
pub const LOOP_ACTION: &str = "#loop";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub to: usize,
    pub prob: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Action {
    pub name: String,
    /// Sorted by successor index; probabilities are positive and sum to 1.
    pub transitions: Vec<Transition>,
}

impl Action {
    pub fn successors(&self) -> impl Iterator<Item = usize> + '_ {
        self.transitions.iter().map(|t| t.to)
    }

    pub fn prob_to(&self, to: usize) -> Rational {
        self.transitions
            .iter()
            .find(|t| t.to == to)
            .map_or_else(Rational::zero, |t| t.prob.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub name: String,
    pub labels: BTreeSet<String>,
    /// Sorted by action name; never empty.
    pub actions: Vec<Action>,
}

/// A finite labeled MDP with exact transition probabilities.
///
/// States are indexed in lexicographic order of their names and actions in
/// lexicographic order per state, so index order is the canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mdp {
    propositions: BTreeSet<String>,
    states: Vec<State>,
    init: Vec<(usize, Rational)>,
    index: HashMap<String, usize>,
}

impl Mdp {
    pub fn builder() -> MdpBuilder {
        MdpBuilder::default()
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn state(&self, v: usize) -> &State {
        &self.states[v]
    }

    pub fn name(&self, v: usize) -> &str {
        &self.states[v].name
    }

    pub fn actions(&self, v: usize) -> &[Action] {
        &self.states[v].actions
    }

    pub fn action(&self, v: usize, a: usize) -> &Action {
        &self.states[v].actions[a]
    }

    pub fn labels(&self, v: usize) -> &BTreeSet<String> {
        &self.states[v].labels
    }

    pub fn has_label(&self, v: usize, label: &str) -> bool {
        self.states[v].labels.contains(label)
    }

    pub fn propositions(&self) -> &BTreeSet<String> {
        &self.propositions
    }

    /// Initial distribution, sorted by state index.
    pub fn init(&self) -> &[(usize, Rational)] {
        &self.init
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require_state(&self, name: &str) -> Result<usize> {
        self.index_of(name).ok_or_else(|| Error::unknown("state", name))
    }

    pub fn action_index(&self, v: usize, name: &str) -> Option<usize> {
        self.states[v]
            .actions
            .binary_search_by(|a| a.name.as_str().cmp(name))
            .ok()
    }

    pub fn require_action(&self, v: usize, name: &str) -> Result<usize> {
        self.action_index(v, name).ok_or_else(|| Error::Unknown {
            kind: "action",
            name: format!("{name} at state {}", self.name(v)),
        })
    }

    pub fn num_actions(&self) -> usize {
        self.states.iter().map(|s| s.actions.len()).sum()
    }

    /// Indicator of the states carrying `label`.
    pub fn label_set(&self, label: &str) -> Vec<bool> {
        (0..self.num_states()).map(|v| self.has_label(v, label)).collect()
    }

    /// Distinct successors of `v` over all its actions, ascending.
    pub fn successors(&self, v: usize) -> Vec<usize> {
        let set: BTreeSet<usize> = self.states[v]
            .actions
            .iter()
            .flat_map(|a| a.successors())
            .collect();
        set.into_iter().collect()
    }

    /// Distinct predecessors per state.
    pub fn predecessors(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![BTreeSet::new(); self.num_states()];
        for v in 0..self.num_states() {
            for w in self.successors(v) {
                preds[w].insert(v);
            }
        }
        preds.into_iter().map(|s| s.into_iter().collect()).collect()
    }

    /// Every enabled action is a probability-1 self-loop.
    pub fn is_absorbing(&self, v: usize) -> bool {
        self.states[v]
            .actions
            .iter()
            .all(|a| a.transitions.len() == 1 && a.transitions[0].to == v)
    }

    /// States reachable from the support of the initial distribution.
    pub fn reachable(&self) -> Vec<bool> {
        let sources: Vec<usize> = self.init.iter().map(|(v, _)| *v).collect();
        crate::graph::forward_reachable(self.num_states(), &sources, |v| self.successors(v))
    }

    /// Same MDP with a different initial distribution.
    pub fn with_init(&self, init: Vec<(usize, Rational)>) -> Result<Mdp> {
        let mut out = self.clone();
        out.init = check_distribution(init, self.num_states(), "initial distribution")?;
        Ok(out)
    }

    /// Builder pre-populated with this MDP, for derived constructions.
    pub fn to_builder(&self) -> MdpBuilder {
        let mut b = MdpBuilder::default();
        for p in &self.propositions {
            b.proposition(p.clone());
        }
        for s in &self.states {
            b.state(s.name.clone(), s.labels.iter().cloned());
        }
        for s in &self.states {
            for a in &s.actions {
                b.action(
                    s.name.clone(),
                    a.name.clone(),
                    a.transitions
                        .iter()
                        .map(|t| (self.name(t.to).to_string(), t.prob.clone())),
                );
            }
        }
        b.init_distribution(
            self.init
                .iter()
                .map(|(v, p)| (self.name(*v).to_string(), p.clone())),
        );
        b
    }
}

fn check_distribution(
    mut dist: Vec<(usize, Rational)>,
    n: usize,
    what: &str,
) -> Result<Vec<(usize, Rational)>> {
    dist.sort_by_key(|(v, _)| *v);
    let mut total = Rational::zero();
    for w in dist.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::invalid(format!("{what} lists a state twice")));
        }
    }
    for (v, p) in &dist {
        if *v >= n {
            return Err(Error::invalid(format!("{what} refers to an unknown state")));
        }
        if *p <= Rational::zero() {
            return Err(Error::invalid(format!("{what} has a non-positive entry")));
        }
        total += p;
    }
    if !total.is_one() {
        return Err(Error::invalid(format!(
            "{what} does not sum to 1 (sum is {})",
            format_rational(&total)
        )));
    }
    Ok(dist)
}

/// Incremental, name-based MDP construction with full validation in
/// [`MdpBuilder::build`].
#[derive(Clone, Debug, Default)]
pub struct MdpBuilder {
    propositions: BTreeSet<String>,
    states: BTreeMap<String, BTreeSet<String>>,
    actions: BTreeMap<(String, String), Vec<(String, Rational)>>,
    init: Option<Vec<(String, Rational)>>,
    first_state: Option<String>,
    errors: Vec<String>,
}

impl MdpBuilder {
    pub fn proposition(&mut self, p: impl Into<String>) -> &mut Self {
        self.propositions.insert(p.into());
        self
    }

    pub fn state<I, S>(&mut self, name: impl Into<String>, labels: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let name = name.into();
        if self.states.contains_key(&name) {
            self.errors.push(format!("state {name:?} is declared twice"));
            return self;
        }
        if self.first_state.is_none() {
            self.first_state = Some(name.clone());
        }
        let labels: BTreeSet<String> = labels.into_iter().map(Into::into).collect();
        self.propositions.extend(labels.iter().cloned());
        self.states.insert(name, labels);
        self
    }

    pub fn has_state(&self, name: &str) -> bool {
        self.states.contains_key(name)
    }

    pub fn action<I, S>(
        &mut self,
        state: impl Into<String>,
        action: impl Into<String>,
        transitions: I,
    ) -> &mut Self
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        let key = (state.into(), action.into());
        if self.actions.contains_key(&key) {
            self.errors.push(format!(
                "action {:?} at state {:?} is declared twice",
                key.1, key.0
            ));
            return self;
        }
        let ts = transitions.into_iter().map(|(s, p)| (s.into(), p)).collect();
        self.actions.insert(key, ts);
        self
    }

    pub fn init_state(&mut self, name: impl Into<String>) -> &mut Self {
        self.init = Some(vec![(name.into(), Rational::one())]);
        self
    }

    pub fn init_distribution<I, S>(&mut self, dist: I) -> &mut Self
    where
        I: IntoIterator<Item = (S, Rational)>,
        S: Into<String>,
    {
        self.init = Some(dist.into_iter().map(|(s, p)| (s.into(), p)).collect());
        self
    }

    pub fn build(&self) -> Result<Mdp> {
        if let Some(e) = self.errors.first() {
            return Err(Error::invalid(e.clone()));
        }
        if self.states.is_empty() {
            return Err(Error::invalid("model has no states"));
        }
        let index: HashMap<String, usize> = self
            .states
            .keys()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        let mut states: Vec<State> = self
            .states
            .iter()
            .map(|(name, labels)| State {
                name: name.clone(),
                labels: labels.clone(),
                actions: Vec::new(),
            })
            .collect();

        for ((state, action), ts) in &self.actions {
            let v = *index.get(state).ok_or_else(|| {
                Error::invalid(format!("action {action:?} belongs to undeclared state {state:?}"))
            })?;
            let mut transitions = Vec::with_capacity(ts.len());
            let mut total = Rational::zero();
            for (to, p) in ts {
                let w = *index.get(to).ok_or_else(|| {
                    Error::invalid(format!(
                        "action {action:?} at state {state:?} leads to undeclared state {to:?}"
                    ))
                })?;
                if *p <= Rational::zero() {
                    return Err(Error::invalid(format!(
                        "action {action:?} at state {state:?} has non-positive probability {} to {to:?}",
                        format_rational(p)
                    )));
                }
                total += p;
                transitions.push(Transition {
                    to: w,
                    prob: p.clone(),
                });
            }
            transitions.sort_by_key(|t| t.to);
            if transitions.windows(2).any(|w| w[0].to == w[1].to) {
                return Err(Error::invalid(format!(
                    "action {action:?} at state {state:?} lists a successor twice"
                )));
            }
            if !total.is_one() {
                return Err(Error::invalid(format!(
                    "probabilities of action {action:?} at state {state:?} do not sum to 1 (sum is {})",
                    format_rational(&total)
                )));
            }
            // BTreeMap order is (state, action), so actions arrive sorted.
            states[v].actions.push(Action {
                name: action.clone(),
                transitions,
            });
        }
        if let Some(s) = states.iter().find(|s| s.actions.is_empty()) {
            return Err(Error::invalid(format!(
                "state {:?} has no enabled action",
                s.name
            )));
        }

        let init_named = match &self.init {
            Some(d) => d.clone(),
            None if self.states.len() == 1 => {
                vec![(self.first_state.clone().unwrap_or_default(), Rational::one())]
            }
            None => return Err(Error::invalid("model has no initial state")),
        };
        let mut init = Vec::with_capacity(init_named.len());
        for (s, p) in init_named {
            let v = *index
                .get(&s)
                .ok_or_else(|| Error::invalid(format!("initial state {s:?} is not declared")))?;
            init.push((v, p));
        }
        let init = check_distribution(init, states.len(), "initial distribution")?;

        Ok(Mdp {
            propositions: self.propositions.clone(),
            states,
            init,
            index,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn one_state() -> Mdp {
        let mut b = Mdp::builder();
        b.state("x", ["P"]).action("x", "stay", [("x", int(1))]);
        b.build().unwrap()
    }

    #[test]
    fn single_absorbing_state() {
        let m = one_state();
        assert_eq!(m.num_states(), 1);
        assert!(m.is_absorbing(0));
        assert_eq!(m.init(), &[(0, int(1))]);
        assert!(m.has_label(0, "P"));
    }

    #[test]
    fn canonical_order() {
        let mut b = Mdp::builder();
        b.state("b", Vec::<String>::new())
            .state("a", Vec::<String>::new())
            .action("b", "z", [("a", int(1))])
            .action("b", "y", [("b", int(1))])
            .action("a", "x", [("a", int(1))])
            .init_state("b");
        let m = b.build().unwrap();
        assert_eq!(m.name(0), "a");
        assert_eq!(m.actions(1)[0].name, "y");
        assert_eq!(m.action_index(1, "z"), Some(1));
        assert_eq!(m.init(), &[(1, int(1))]);
    }

    #[test]
    fn rejects_bad_sum() {
        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new())
            .state("y", Vec::<String>::new())
            .action("x", "a", [("y", rat(9, 10))])
            .action("y", "a", [("y", int(1))])
            .init_state("x");
        let err = b.build().unwrap_err().to_string();
        assert!(err.contains("do not sum to 1"), "{err}");
        assert!(err.contains("9/10"), "{err}");
    }

    #[test]
    fn rejects_missing_action_and_unknown_successor() {
        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new())
            .state("y", Vec::<String>::new())
            .action("x", "a", [("y", int(1))])
            .init_state("x");
        assert!(b.build().unwrap_err().to_string().contains("no enabled action"));

        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new())
            .action("x", "a", [("nowhere", int(1))]);
        assert!(b.build().unwrap_err().to_string().contains("undeclared"));
    }

    #[test]
    fn rejects_duplicate_successor_and_zero_probability() {
        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new()).action(
            "x",
            "a",
            [("x", rat(1, 2)), ("x", rat(1, 2))],
        );
        assert!(b.build().is_err());

        let mut b = Mdp::builder();
        b.state("x", Vec::<String>::new())
            .action("x", "a", [("x", int(1))]);
        b.state("y", Vec::<String>::new())
            .action("y", "a", [("x", int(1)), ("y", int(0))])
            .init_state("x");
        assert!(b.build().is_err());
    }

    #[test]
    fn init_must_be_a_distribution() {
        let m = one_state();
        assert!(m.with_init(vec![(0, rat(1, 2))]).is_err());
        assert!(m.with_init(vec![(0, int(1))]).is_ok());
    }

    #[test]
    fn builder_round_trip() {
        let m = one_state();
        assert_eq!(m.to_builder().build().unwrap(), m);
    }
}
