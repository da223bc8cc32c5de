//! Synchronous product of an MDP with deterministic automata.
//!
//! A fresh initial state `#init` with the single action `#start` disperses
//! according to the source's initial distribution; every automaton reads the
//! label of the state being entered, so the first letter is the label of the
//! first real state.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::One;

use crate::automata::rabin::RabinAutomaton;
use crate::error::{Error, Result};
use crate::model::controller::{mix_choice, posterior, Branch, Controller};
use crate::model::mdp::Mdp;
use crate::model::strategy::{merge_dist, Dist};

pub const PRODUCT_INIT: &str = "#init";
pub const START_ACTION: &str = "#start";

/// Source state and automaton states of a product state.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductKey {
    pub source: usize,
    pub aut: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct ProductMdp {
    pub mdp: Mdp,
    /// `None` for the dummy initial state.
    pub keys: Vec<Option<ProductKey>>,
    pub init: usize,
    pub automata: Vec<RabinAutomaton>,
    index: HashMap<ProductKey, usize>,
}

impl ProductMdp {
    pub fn index_of(&self, key: &ProductKey) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Automaton states after entering source state `y` from `aut`.
    pub fn advance(&self, aut: &[usize], source: &Mdp, y: usize) -> Vec<usize> {
        self.automata
            .iter()
            .zip(aut)
            .map(|(a, &q)| a.step(q, source.labels(y)))
            .collect()
    }

    pub fn initial_aut(&self) -> Vec<usize> {
        self.automata.iter().map(RabinAutomaton::initial).collect()
    }

    /// Product state entered when the source moves to `y` from automaton
    /// states `aut`.
    pub fn successor(&self, aut: &[usize], source: &Mdp, y: usize) -> Result<usize> {
        let key = ProductKey {
            source: y,
            aut: self.advance(aut, source, y),
        };
        self.index_of(&key)
            .ok_or_else(|| Error::Internal("successor missing from product".into()))
    }

    /// States whose component for automaton `i` lies in `set`.
    pub fn component_in(&self, i: usize, set: &BTreeSet<usize>) -> Vec<bool> {
        self.keys
            .iter()
            .map(|k| k.as_ref().is_some_and(|k| set.contains(&k.aut[i])))
            .collect()
    }
}

fn product_name(m: &Mdp, key: &ProductKey) -> String {
    if key.aut.is_empty() {
        m.name(key.source).to_string()
    } else {
        let qs: Vec<String> = key.aut.iter().map(usize::to_string).collect();
        format!("{}@{}", m.name(key.source), qs.join("."))
    }
}

/// Builds the reachable part of `m × automata` from the dummy initial state.
pub fn product(m: &Mdp, automata: &[RabinAutomaton]) -> Result<ProductMdp> {
    let missing: BTreeSet<String> = automata
        .iter()
        .flat_map(|a| a.aps().iter())
        .filter(|p| !m.propositions().contains(*p))
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(Error::AlphabetMismatch {
            missing: missing.into_iter().collect(),
        });
    }
    if m.index_of(PRODUCT_INIT).is_some() {
        return Err(Error::invalid(format!("state name {PRODUCT_INIT} is reserved")));
    }
    let step = |aut: &[usize], y: usize| -> Vec<usize> {
        automata
            .iter()
            .zip(aut)
            .map(|(a, &q)| a.step(q, m.labels(y)))
            .collect()
    };
    let q0: Vec<usize> = automata.iter().map(RabinAutomaton::initial).collect();

    let mut seen: HashMap<ProductKey, ()> = HashMap::new();
    let mut order: Vec<ProductKey> = Vec::new();
    let mut queue = VecDeque::new();
    let mut b = Mdp::builder();
    for p in m.propositions() {
        b.proposition(p.clone());
    }
    b.state(PRODUCT_INIT, Vec::<String>::new());
    let mut start = Vec::new();
    for (x, p) in m.init() {
        let key = ProductKey { source: *x, aut: step(&q0, *x) };
        start.push((product_name(m, &key), p.clone()));
        if seen.insert(key.clone(), ()).is_none() {
            queue.push_back(key);
        }
    }
    b.action(PRODUCT_INIT, START_ACTION, start);
    while let Some(key) = queue.pop_front() {
        let name = product_name(m, &key);
        b.state(name.clone(), m.labels(key.source).iter().cloned());
        for a in m.actions(key.source) {
            let mut ts = Vec::with_capacity(a.transitions.len());
            for t in &a.transitions {
                let next = ProductKey { source: t.to, aut: step(&key.aut, t.to) };
                ts.push((product_name(m, &next), t.prob.clone()));
                if seen.insert(next.clone(), ()).is_none() {
                    queue.push_back(next);
                }
            }
            b.action(name.clone(), a.name.clone(), ts);
        }
        order.push(key);
    }
    b.init_state(PRODUCT_INIT);
    let mdp = b.build()?;

    let mut keys = vec![None; mdp.num_states()];
    let mut index = HashMap::with_capacity(order.len());
    for key in order {
        let v = mdp.require_state(&product_name(m, &key))?;
        keys[v] = Some(key.clone());
        index.insert(key, v);
    }
    let init = mdp.require_state(PRODUCT_INIT)?;
    Ok(ProductMdp {
        mdp,
        keys,
        init,
        automata: automata.to_vec(),
        index,
    })
}

/// Mode of a projected strategy on the source MDP: before the first step the
/// inner mode is still random; afterwards the automaton states are tracked
/// alongside the inner mode.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ProjectedMode<M> {
    Start,
    At(Vec<usize>, M),
}

/// Runs a controller of the product MDP on the source MDP by tracking the
/// automaton states in memory.
pub struct Projected<'a, C: Controller> {
    pub source: &'a Mdp,
    pub product: &'a ProductMdp,
    pub inner: &'a C,
}

impl<'a, C: Controller> Projected<'a, C> {
    pub fn new(source: &'a Mdp, product: &'a ProductMdp, inner: &'a C) -> Self {
        Projected { source, product, inner }
    }

    fn start_aut(&self, x: usize) -> Vec<usize> {
        self.product.advance(&self.product.initial_aut(), self.source, x)
    }

    /// Inner modes (with weights) that may be active at source state `x`.
    fn branches(&self, x: usize, mode: &ProjectedMode<C::Mode>) -> Result<(Vec<usize>, Vec<Branch<C::Mode>>)> {
        let (aut, prior): (Vec<usize>, Dist<C::Mode>) = match mode {
            ProjectedMode::Start => {
                let aut = self.start_aut(x);
                let u = self.product.successor(&self.product.initial_aut(), self.source, x)?;
                let init_mode = self.inner.initial_mode();
                let start = self.inner.choice(self.product.init, &init_mode)?;
                if start.len() != 1 || !start[0].1.is_one() {
                    return Err(Error::Internal("dummy state must play its only action".into()));
                }
                let prior = self.inner.update(self.product.init, &init_mode, start[0].0, u)?;
                (aut, prior)
            }
            ProjectedMode::At(aut, m) => (aut.clone(), vec![(m.clone(), num_traits::One::one())]),
        };
        let u = self
            .product
            .index_of(&ProductKey { source: x, aut: aut.clone() })
            .ok_or_else(|| Error::Internal("projected strategy left the product".into()))?;
        let mut branches = Vec::with_capacity(prior.len());
        for (m, w) in prior {
            branches.push(Branch {
                weight: w,
                choice: self.inner.choice(u, &m)?,
                tag: m,
            });
        }
        Ok((aut, branches))
    }
}

impl<C: Controller> Controller for Projected<'_, C> {
    type Mode = ProjectedMode<C::Mode>;

    fn initial_mode(&self) -> Self::Mode {
        ProjectedMode::Start
    }

    fn choice(&self, x: usize, mode: &Self::Mode) -> Result<Dist<usize>> {
        let (_, branches) = self.branches(x, mode)?;
        Ok(mix_choice(&branches))
    }

    fn update(&self, x: usize, mode: &Self::Mode, a: usize, y: usize) -> Result<Dist<Self::Mode>> {
        let (aut, branches) = self.branches(x, mode)?;
        let u = self
            .product
            .index_of(&ProductKey { source: x, aut: aut.clone() })
            .ok_or_else(|| Error::Internal("projected strategy left the product".into()))?;
        let next_aut = self.product.advance(&aut, self.source, y);
        let v = self
            .product
            .index_of(&ProductKey { source: y, aut: next_aut.clone() })
            .ok_or_else(|| Error::Internal("successor missing from product".into()))?;
        let mut out = Vec::new();
        for (b, w) in posterior(&branches, a) {
            for (m, p) in self.inner.update(u, &b.tag, a, v)? {
                out.push((ProjectedMode::At(next_aut.clone(), m), w.clone() * p));
            }
        }
        Ok(merge_dist(out))
    }

    fn mode_name(&self, mode: &Self::Mode) -> String {
        match mode {
            ProjectedMode::Start => "start".into(),
            ProjectedMode::At(aut, m) => {
                let qs: Vec<String> = aut.iter().map(usize::to_string).collect();
                format!("q{}|{}", qs.join("."), self.inner.mode_name(m))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, rat};

    fn three_states() -> Mdp {
        let mut b = Mdp::builder();
        b.state("a", Vec::<String>::new())
            .state("b", ["P"])
            .state("c", Vec::<String>::new())
            .action("a", "go", [("b", rat(1, 2)), ("c", rat(1, 2))])
            .action("b", "back", [("a", int(1))])
            .action("c", "stay", [("c", int(1))])
            .init_state("a");
        b.build().unwrap()
    }

    #[test]
    fn size_bound_and_structure() {
        let m = three_states();
        let p = product(&m, &[RabinAutomaton::reach("P")]).unwrap();
        assert!(p.mdp.num_states() <= 3 * 2 + 1);
        assert_eq!(p.mdp.name(p.init), PRODUCT_INIT);
        assert_eq!(p.mdp.actions(p.init).len(), 1);
        // a@0 -> b@1 -> a@1 -> b@1 / c@1, and c@0
        let names: Vec<&str> = (0..p.mdp.num_states()).map(|v| p.mdp.name(v)).collect();
        assert_eq!(names, vec!["#init", "a@0", "a@1", "b@1", "c@0", "c@1"]);
        for v in 0..p.mdp.num_states() {
            if let Some(k) = &p.keys[v] {
                assert_eq!(p.mdp.labels(v), m.labels(k.source));
                assert_eq!(p.mdp.actions(v).len(), m.actions(k.source).len());
            }
        }
    }

    #[test]
    fn empty_automata_list_copies_the_model() {
        let m = three_states();
        let p = product(&m, &[]).unwrap();
        assert_eq!(p.mdp.num_states(), m.num_states() + 1);
        let a = p.mdp.require_state("a").unwrap();
        assert_eq!(p.mdp.actions(a), m.actions(0).iter().map(|act| {
            let mut act = act.clone();
            for t in &mut act.transitions {
                t.to = p.mdp.require_state(m.name(t.to)).unwrap();
            }
            act
        }).collect::<Vec<_>>().as_slice());
    }

    #[test]
    fn alphabet_mismatch() {
        let m = three_states();
        match product(&m, &[RabinAutomaton::reach("Q")]) {
            Err(Error::AlphabetMismatch { missing }) => assert_eq!(missing, vec!["Q".to_string()]),
            other => panic!("{other:?}"),
        }
    }
}
