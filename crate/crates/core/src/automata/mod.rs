//! Deterministic Rabin automata and MDP products.

pub mod hoa;
pub mod product;
pub mod rabin;

pub use hoa::{parse_automaton, parse_automaton_with, HoaOptions};
pub use product::{product, ProductKey, ProductMdp, Projected, PRODUCT_INIT, START_ACTION};
pub use rabin::{RabinAutomaton, RabinPair};
