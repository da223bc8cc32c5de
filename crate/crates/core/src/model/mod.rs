//! Labeled MDPs, strategies, and induced Markov chains.

pub mod chain;
pub mod controller;
pub mod format;
pub mod mdp;
pub mod strategy;

pub use chain::{
    bscc_analysis, induced_chain, induced_chain_from, reach_probabilities, BsccAnalysis,
    InducedChain, MarkovChain,
};
pub use controller::{materialize, Controller};
pub use format::{mdp_to_json, parse_mdp};
pub use mdp::{Action, Mdp, MdpBuilder, State, Transition, DEAD_LABEL, DEAD_STATE, LOOP_ACTION};
pub use strategy::{merge_dist, parse_strategy, uniform, Dist, Strategy};
