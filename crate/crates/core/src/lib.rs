//! Multi-objective model checking of Markov decision processes.
//!
//! Decides achievability of probability vectors for several reachability or
//! ω-regular (deterministic Rabin) objectives at once, evaluates boolean
//! queries over such objectives, synthesizes witness strategies, and computes
//! exact or ε-approximate Pareto curves. All arithmetic is exact.

pub mod automata;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod linalg;
pub mod lp;
pub mod model;
pub mod num;
pub mod objectives;
pub mod oracle;
pub mod pareto;
pub mod qualitative;
pub mod query;
pub mod reduction;

pub use error::{Error, Result};
pub use num::{Field, Rational};

pub use automata::{ProductMdp, RabinAutomaton};
pub use model::{Mdp, Strategy};
pub use objectives::{Problem, Property};

/// Simplex instance over the exact probability scalar.
pub type LinearProgram = lp::simplex::LinearProgram<Rational>;
/// Down-closed convex hull over the exact probability scalar.
pub type DownHull = geometry::DownHull<Rational>;
/// A probability vector, one entry per objective.
pub type Point = Vec<Rational>;
