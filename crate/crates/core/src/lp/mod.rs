//! Exact linear programming and the multi-objective flow LP.

pub mod dump;
pub mod multiobj;
pub mod simplex;

pub use dump::dump_lp;
pub use multiobj::{build_multiobj_lp, Achievability, LpVar, MultiObjectiveLp, WeightedOptimum};
pub use simplex::{Constraint, LinearProgram, LpOutcome, Sense, Tableau};
