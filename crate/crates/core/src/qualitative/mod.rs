//! Graph-based analysis: end components, almost-sure target regions, and
//! the decision procedure for probability-1 / positive-probability queries.

pub mod decide;
pub mod mec;
pub mod target;

pub use decide::{decide_qualitative, prune, QualitativeOutcome, QualitativeQuery};
pub use mec::{maximal_end_components, maximal_end_components_with, EndComponent};
pub use target::{compute_target_set, good_end_components, synthesize_mu, Mu, MuMode, TargetSet};
