#![allow(dead_code)]

use std::collections::BTreeSet;

use momc_core::automata::{RabinAutomaton, RabinPair};
use momc_core::num::{int, rat, Rational};
use momc_core::Mdp;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// s --a1--> P1 3/5, x1 2/5; a2 --> P2 4/5, x2 1/5; a3 --> P1 1/2, P2 1/2.
pub fn split() -> Mdp {
    let mut b = Mdp::builder();
    b.state("s", Vec::<&str>::new())
        .state("t1", ["P1"])
        .state("t2", ["P2"])
        .state("x1", Vec::<&str>::new())
        .state("x2", Vec::<&str>::new())
        .action("s", "a1", [("t1", rat(3, 5)), ("x1", rat(2, 5))])
        .action("s", "a2", [("t2", rat(4, 5)), ("x2", rat(1, 5))])
        .action("s", "a3", [("t1", rat(1, 2)), ("t2", rat(1, 2))])
        .action("t1", "stay", [("t1", int(1))])
        .action("t2", "stay", [("t2", int(1))])
        .action("x1", "stay", [("x1", int(1))])
        .action("x2", "stay", [("x2", int(1))])
        .init_state("s");
    b.build().unwrap()
}

/// u --go--> p1; p1 --a--> u; p1 --b--> p2, which loops.
pub fn loops() -> Mdp {
    let mut b = Mdp::builder();
    b.state("u", Vec::<&str>::new())
        .state("p1", ["P1"])
        .state("p2", ["P2"])
        .action("u", "go", [("p1", int(1))])
        .action("p1", "a", [("u", int(1))])
        .action("p1", "b", [("p2", int(1))])
        .action("p2", "loop", [("p2", int(1))])
        .init_state("u");
    b.build().unwrap()
}

/// Random distribution over `support` with denominators up to 12.
fn random_dist(rng: &mut ChaCha8Rng, support: &[String]) -> Vec<(String, Rational)> {
    let weights: Vec<i64> = support.iter().map(|_| rng.gen_range(1..=4)).collect();
    let total: i64 = weights.iter().sum();
    support.iter().zip(weights).map(|(s, w)| (s.clone(), rat(w, total))).collect()
}

/// Random reachability instance: `inner` transient states with one or two
/// actions each, plus `k` absorbing targets `t{i}` labelled `T{i}` and an
/// absorbing unlabelled `z`.
pub fn random_reach_mdp(rng: &mut ChaCha8Rng, inner: usize, k: usize) -> Mdp {
    let mut b = Mdp::builder();
    let names: Vec<String> = (0..inner).map(|i| format!("v{i}")).collect();
    let mut all = names.clone();
    for i in 0..k {
        let t = format!("t{i}");
        b.state(t.clone(), [format!("T{i}")]);
        all.push(t);
    }
    b.state("z", Vec::<&str>::new());
    all.push("z".into());
    for n in &names {
        b.state(n.clone(), Vec::<&str>::new());
    }
    for n in &names {
        let acts = rng.gen_range(1..=2);
        for a in 0..acts {
            let size = rng.gen_range(1..=3);
            let mut support: Vec<String> = all.choose_multiple(rng, size).cloned().collect();
            support.sort();
            b.action(n.clone(), format!("a{a}"), random_dist(rng, &support));
        }
    }
    for t in all.iter().filter(|t| !names.contains(t)) {
        b.action(t.clone(), "stay", [(t.clone(), int(1))]);
    }
    b.init_state("v0");
    b.build().unwrap()
}

pub fn target_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("T{i}")).collect()
}

/// Random labelled MDP over propositions `p`, `q`.
pub fn random_labelled_mdp(rng: &mut ChaCha8Rng, n: usize) -> Mdp {
    let mut b = Mdp::builder();
    b.proposition("p").proposition("q");
    let names: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    for name in &names {
        let mut labels = Vec::new();
        if rng.gen_bool(0.4) {
            labels.push("p");
        }
        if rng.gen_bool(0.4) {
            labels.push("q");
        }
        b.state(name.clone(), labels);
    }
    for name in &names {
        for a in 0..rng.gen_range(1..=2) {
            let size = rng.gen_range(1..=2);
            let mut support: Vec<String> = names.choose_multiple(rng, size).cloned().collect();
            support.sort();
            b.action(name.clone(), format!("a{a}"), random_dist(rng, &support));
        }
    }
    b.init_state("w0");
    b.build().unwrap()
}

/// Random complete deterministic Rabin automaton over `p`, `q` with at most
/// `max_states` states and one or two pairs.
pub fn random_rabin(rng: &mut ChaCha8Rng, max_states: usize) -> RabinAutomaton {
    let n = rng.gen_range(1..=max_states);
    let delta: Vec<Vec<usize>> = (0..n).map(|_| (0..4).map(|_| rng.gen_range(0..n)).collect()).collect();
    let subset = |rng: &mut ChaCha8Rng| -> BTreeSet<usize> { (0..n).filter(|_| rng.gen_bool(0.4)).collect() };
    let pairs = (0..rng.gen_range(1..=2))
        .map(|_| {
            let mut repeat = subset(rng);
            if repeat.is_empty() {
                repeat.insert(rng.gen_range(0..n));
            }
            let avoid: BTreeSet<usize> = subset(rng).difference(&repeat).copied().collect();
            RabinPair { avoid, repeat }
        })
        .collect();
    RabinAutomaton::new(vec!["p".into(), "q".into()], 0, delta, pairs).unwrap()
}

/// Probe vectors around the given hull vertices: the vertices themselves,
/// scaled and shifted copies, midpoints, and random points, each with
/// random strict flags. Returns `(r, strict)` pairs.
pub fn sample_vectors(
    rng: &mut ChaCha8Rng,
    vertices: &[Vec<Rational>],
    k: usize,
    count: usize,
) -> Vec<(Vec<Rational>, Vec<usize>)> {
    let clamp = |x: Rational| if x > int(1) { int(1) } else if x < int(0) { int(0) } else { x };
    let mut out = Vec::new();
    while out.len() < count {
        let r: Vec<Rational> = match (out.len() % 5, vertices.is_empty()) {
            (0, false) => vertices[rng.gen_range(0..vertices.len())].clone(),
            (1, false) => {
                let v = &vertices[rng.gen_range(0..vertices.len())];
                v.iter().map(|x| x.clone() * rat(19, 20)).collect()
            }
            (2, false) => {
                let v = &vertices[rng.gen_range(0..vertices.len())];
                let i = rng.gen_range(0..k);
                v.iter().enumerate().map(|(j, x)| if j == i { clamp(x.clone() + rat(1, 50)) } else { x.clone() }).collect()
            }
            (3, false) => {
                let a = &vertices[rng.gen_range(0..vertices.len())];
                let b = &vertices[rng.gen_range(0..vertices.len())];
                a.iter().zip(b).map(|(x, y)| (x.clone() + y.clone()) / int(2)).collect()
            }
            _ => (0..k).map(|_| rat(rng.gen_range(0..=10), 10)).collect(),
        };
        let strict: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.3)).collect();
        out.push((r, strict));
    }
    out
}
