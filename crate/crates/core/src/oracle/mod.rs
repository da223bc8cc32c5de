//! Independent correctness machinery: brute-force achievable sets, exact
//! strategy validation, and generated hard instances.

pub mod hard;
pub mod hull;
pub mod validate;

pub use hard::{gen_hard_instance, path_pareto_vertices, HardInstance};
pub use hull::{
    automaton_memory_strategies, build_automaton_oracle, build_hull_oracle, memoryless_supports,
    pure_finite_memory, HullOracle, DEFAULT_CAP,
};
pub use validate::{
    automaton_probability, bound_claims, evaluate_properties, validate_strategy, Claim, Comparator,
    ValidationReport,
};
