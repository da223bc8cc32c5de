use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Multi-objective model checking of Markov decision processes.
///
/// Exit status: 0 = yes/sat/pass, 1 = no/unsat/fail, 2 = usage or input error.
#[derive(Debug, Parser)]
#[command(name = "momc", version)]
pub struct Cli {
    /// Skip re-validating witness strategies on the induced chain.
    #[arg(long, global = true)]
    pub no_self_check: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and lint a model.
    Validate { model: PathBuf },
    /// Is a probability vector achievable for the given objectives?
    Achievable(AchievableArgs),
    /// Evaluate a query file.
    Query(QueryArgs),
    /// Qualitative check: some properties almost surely, others positively.
    Qualitative(QualitativeArgs),
    /// Pareto curve: an ε-approximation, or the exact bi-objective vertices.
    Pareto(ParetoArgs),
    /// Exact bi-objective Pareto vertices, one per line.
    Vertices(ObjectiveArgs),
    /// Evaluate a strategy file and check claims against it.
    CheckStrategy(CheckArgs),
    /// Generate a layered instance with many Pareto vertices.
    GenHard(GenHardArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Route {
    /// Absorbing reachability goes straight to the LP; everything else
    /// through the product reduction.
    #[default]
    Auto,
    /// Always use the product reduction.
    Reduction,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ObjectiveArgs {
    pub model: PathBuf,
    /// Objectives, comma separated: `LABEL` (reach), `reach:L`, `avoid:L`,
    /// `buchi:L`, `cobuchi:L` or `automaton:FILE`. Defaults to reaching
    /// every label of the model, in sorted order.
    #[arg(long, value_delimiter = ',')]
    pub targets: Vec<String>,
    #[arg(long, value_enum, default_value_t)]
    pub route: Route,
}

#[derive(Debug, Args)]
pub struct AchievableArgs {
    #[command(flatten)]
    pub objectives: ObjectiveArgs,
    /// Lower bounds, one per objective.
    #[arg(long, value_delimiter = ',', required = true)]
    pub bound: Vec<String>,
    /// 1-based indices of objectives whose bound is strict.
    #[arg(long, value_delimiter = ',')]
    pub strict: Vec<usize>,
    /// Where to write the witness strategy (default: standard output).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub model: PathBuf,
    pub query: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub route: Route,
    /// Decide every disjunct with the LP, even qualitative ones.
    #[arg(long)]
    pub no_qualitative: bool,
    /// Upper limit on the number of disjuncts after normalization.
    #[arg(long, default_value_t = momc_core::query::DEFAULT_DNF_CAP)]
    pub dnf_cap: usize,
    /// Where to write the witness or counterexample strategy.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QualitativeArgs {
    pub model: PathBuf,
    /// Properties to hold with probability 1.
    #[arg(long, value_delimiter = ',')]
    pub sure: Vec<String>,
    /// Properties to hold with positive probability.
    #[arg(long, value_delimiter = ',')]
    pub positive: Vec<String>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ParetoArgs {
    #[command(flatten)]
    pub objectives: ObjectiveArgs,
    /// Approximation factor; every achievable point is covered up to 1+ε.
    #[arg(long, conflicts_with = "exact2", required_unless_present = "exact2")]
    pub epsilon: Option<String>,
    /// Exact vertices of a two-objective curve.
    #[arg(long)]
    pub exact2: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Points file (default: standard output).
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Directory receiving one strategy file per point.
    #[arg(long)]
    pub strategies: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub objectives: ObjectiveArgs,
    pub strategy: PathBuf,
    /// Claims, one per objective: `>=1/2`, `>0`, `<=0.3`, `=1`, `!=0`; a
    /// bare number means `>=`.
    #[arg(long, value_delimiter = ',')]
    pub claims: Vec<String>,
}

#[derive(Debug, Args)]
pub struct GenHardArgs {
    /// Number of layers (2..=24).
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}
