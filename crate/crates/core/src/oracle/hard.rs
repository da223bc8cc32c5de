//! Layered bi-objective shortest-path instances turned into two-target
//! reachability MDPs whose Pareto curve mirrors the path Pareto curve.
//!
//! An edge `(u, v)` leaving layer `i` becomes an action at `u` that moves to
//! `v` with probability 1/2, to the red target with
//! `r(u,v) = 2^i (2h − c(u,v)) / (8h 2^n)`, to the blue target with
//! `b(u,v) = 2^i (2h − d(u,v)) / (8h 2^n)`, and to `t` with the rest. Layer
//! `i` is entered with probability `2^{-i}` whatever the path, so a path's
//! red probability is `n/(4·2^n) − c(π)/(8h·2^n)` and likewise for blue.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::mdp::Mdp;
use crate::model::strategy::Strategy;
use crate::num::{int, Rational};

/// Largest supported layer count.
pub const MAX_LAYERS: usize = 24;
/// Nodes per inner layer.
pub const WIDTH: usize = 3;
pub const RED: &str = "R";
pub const BLUE: &str = "B";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Layer of the tail.
    pub layer: usize,
    pub from: usize,
    pub to: usize,
    pub c: u64,
    pub d: u64,
}

#[derive(Clone, Debug)]
pub struct HardInstance {
    pub layers: usize,
    /// Node names per layer; layer 0 is `["s"]` and layer `n` is `["t"]`.
    pub nodes: Vec<Vec<String>>,
    pub edges: Vec<Edge>,
    /// Largest edge cost.
    pub h: u64,
    pub mdp: Mdp,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    /// Edge indices, one per layer.
    pub edges: Vec<usize>,
    pub c: u64,
    pub d: u64,
}

fn node_name(layer: usize, k: usize, n: usize) -> String {
    match layer {
        0 => "s".into(),
        l if l == n => "t".into(),
        l => format!("u{l}_{k}"),
    }
}

/// Generates an `n`-layer instance. Costs follow a doubling pattern: an edge
/// into node `k` of layer `i+1` trades `c` against `d` in steps of
/// `2^{i mod 3}`, perturbed by a small random amount.
pub fn gen_hard_instance(n: usize, seed: u64) -> Result<HardInstance> {
    if !(2..=MAX_LAYERS).contains(&n) {
        return Err(Error::invalid(format!("layer count must be between 2 and {MAX_LAYERS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<Vec<String>> = (0..=n)
        .map(|l| {
            let w = if l == 0 || l == n { 1 } else { WIDTH };
            (0..w).map(|k| node_name(l, k, n)).collect()
        })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        let step = 1u64 << (i % 3);
        for from in 0..nodes[i].len() {
            for to in 0..nodes[i + 1].len() {
                let k = to as u64;
                let c = 1 + step * k * k + rng.gen_range(0..=step);
                let d = 1 + step * (WIDTH as u64 - 1 - k) * (WIDTH as u64 + 1) + rng.gen_range(0..=step);
                edges.push(Edge { layer: i, from, to, c, d });
            }
        }
    }
    let h = edges.iter().map(|e| e.c.max(e.d)).max().expect("edges exist");
    let mdp = build_mdp(n, &nodes, &edges, h)?;
    Ok(HardInstance { layers: n, nodes, edges, h, mdp })
}

fn build_mdp(n: usize, nodes: &[Vec<String>], edges: &[Edge], h: u64) -> Result<Mdp> {
    let denom = Rational::from_integer((8 * h).into()) * Rational::from_integer(num_bigint::BigInt::one() << n);
    let mut b = Mdp::builder();
    for layer in nodes {
        for name in layer {
            b.state(name.clone(), Vec::<String>::new());
        }
    }
    b.state(RED, [RED]).state(BLUE, [BLUE]);
    for (j, e) in edges.iter().enumerate() {
        let scale = Rational::from_integer(num_bigint::BigInt::one() << e.layer);
        let r = scale.clone() * int((2 * h - e.c) as i64) / denom.clone();
        let bl = scale * int((2 * h - e.d) as i64) / denom.clone();
        let half = Rational::new(1.into(), 2.into());
        let rest = Rational::one() - r.clone() - bl.clone() - half.clone();
        let to = nodes[e.layer + 1][e.to].clone();
        let mut ts = vec![(to, half), (RED.to_string(), r), (BLUE.to_string(), bl)];
        if ts[0].0 == "t" {
            // last layer: the half and the residual both go to t
            ts[0].1 += rest;
        } else {
            ts.push(("t".to_string(), rest));
        }
        ts.retain(|(_, p)| !p.is_zero());
        b.action(nodes[e.layer][e.from].clone(), format!("e{j}"), ts);
    }
    for name in ["t", RED, BLUE] {
        b.action(name, "stay", [(name, Rational::one())]);
    }
    b.init_state("s");
    b.build()
}

impl HardInstance {
    /// Every s–t path with its costs, in lexicographic order of edge indices.
    pub fn paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0usize, Vec::new())];
        while let Some((layer, node, taken)) = stack.pop() {
            if layer == self.layers {
                let c = taken.iter().map(|&j: &usize| self.edges[j].c).sum();
                let d = taken.iter().map(|&j: &usize| self.edges[j].d).sum();
                out.push(Path { edges: taken, c, d });
                continue;
            }
            for (j, e) in self.edges.iter().enumerate().rev() {
                if e.layer == layer && e.from == node {
                    let mut next = taken.clone();
                    next.push(j);
                    stack.push((layer + 1, e.to, next));
                }
            }
        }
        out
    }

    /// The pure strategy following `path`; off-path nodes take their first
    /// edge.
    pub fn strategy(&self, path: &Path) -> Result<Strategy> {
        let m = &self.mdp;
        let mut actions = vec![0usize; m.num_states()];
        for &j in &path.edges {
            let e = &self.edges[j];
            let v = m.require_state(&self.nodes[e.layer][e.from])?;
            actions[v] = m.require_action(v, &format!("e{j}"))?;
        }
        Strategy::pure(m, &actions)
    }

    /// `(a, b)` with `Pr_π(◇R) = a − b·c(π)` and `Pr_π(◇B) = a − b·d(π)`.
    pub fn affine_constants(&self) -> (Rational, Rational) {
        let two_n = Rational::from_integer(num_bigint::BigInt::one() << self.layers);
        let a = int(self.layers as i64) / (int(4) * two_n.clone());
        let b = Rational::one() / (Rational::from_integer((8 * self.h).into()) * two_n);
        (a, b)
    }
}

/// Vertices of the path cost curve: the extreme points of
/// `conv{(c(π), d(π))} + ℝ²_{≥0}`, ordered by increasing `c`.
pub fn path_pareto_vertices(costs: &[(u64, u64)]) -> Vec<(u64, u64)> {
    let mut pts: Vec<(i128, i128)> = costs.iter().map(|&(c, d)| (c as i128, d as i128)).collect();
    pts.sort_unstable();
    pts.dedup();
    // keep the cheapest d for every c, then only strict improvements in d
    let mut stair: Vec<(i128, i128)> = Vec::new();
    for p in pts {
        if stair.last().is_none_or(|q| p.1 < q.1) {
            stair.push(p);
        }
    }
    // lower convex chain (Andrew's monotone chain), strict turns only
    let mut hull: Vec<(i128, i128)> = Vec::new();
    for p in stair {
        while hull.len() >= 2 {
            let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull.into_iter().map(|(c, d)| (c as u64, d as u64)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::chain::{induced_chain, reach_probabilities};

    #[test]
    fn probabilities_are_well_formed() {
        let inst = gen_hard_instance(5, 7).unwrap();
        let m = &inst.mdp;
        let quarter = Rational::new(1.into(), 4.into());
        let red = m.index_of(RED).unwrap();
        let blue = m.index_of(BLUE).unwrap();
        for v in 0..m.num_states() {
            for a in m.actions(v).iter().filter(|a| a.name.starts_with('e')) {
                let total = a.transitions.iter().fold(Rational::zero(), |s, t| s + &t.prob);
                assert!(total.is_one());
                assert!(a.prob_to(red) <= quarter && a.prob_to(blue) <= quarter);
            }
        }
        assert!(gen_hard_instance(1, 0).is_err());
    }

    #[test]
    fn path_probabilities_are_affine_in_costs() {
        let inst = gen_hard_instance(4, 3).unwrap();
        let (a, b) = inst.affine_constants();
        let m = &inst.mdp;
        let targets = [m.label_set(RED), m.label_set(BLUE)];
        let paths = inst.paths();
        assert_eq!(paths.len(), WIDTH.pow(3));
        for p in paths {
            let got = reach_probabilities(&induced_chain(m, &inst.strategy(&p).unwrap()).unwrap(), &targets).unwrap();
            assert_eq!(got[0], a.clone() - b.clone() * int(p.c as i64));
            assert_eq!(got[1], a.clone() - b.clone() * int(p.d as i64));
        }
    }

    #[test]
    fn cost_curve_vertices() {
        let pts = [(1, 9), (2, 5), (4, 4), (3, 3), (9, 1), (6, 2), (7, 2), (3, 7)];
        // (4,4), (7,2), (3,7) are dominated; (6,2) lies on the chord (3,3)–(9,1)
        assert_eq!(path_pareto_vertices(&pts), vec![(1, 9), (2, 5), (3, 3), (9, 1)]);
        assert_eq!(path_pareto_vertices(&[(3, 3), (5, 2), (9, 1)]), vec![(3, 3), (5, 2), (9, 1)]);
        assert_eq!(path_pareto_vertices(&[(2, 2), (2, 2)]), vec![(2, 2)]);
        // collinear middle point is not a vertex
        assert_eq!(path_pareto_vertices(&[(0, 2), (1, 1), (2, 0)]), vec![(0, 2), (2, 0)]);
    }
}
