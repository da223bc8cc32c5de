//! Boolean queries over probability predicates: parsing, normal form,
//! evaluation, and query files.

pub mod eval;
pub mod file;
pub mod normalize;
pub mod parse;

pub use eval::{
    check_assume_guarantee, evaluate, evaluate_forall, evaluate_normalized, EvalOptions, GuaranteeOutcome, Method,
    PropertyTable, QueryOutcome, Witness,
};
pub use file::{parse_query_file, QueryFile, Statement};
pub use normalize::{normalize, normalize_negated, Complements, Conjunct, LowerBound, NormalizedQuery, DEFAULT_DNF_CAP};
pub use parse::{parse_query, Predicate, Query};
