mod args;
mod commands;
mod render;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::{Failure, Verdict};

/// Environment variable holding the number of worker threads.
const THREADS_VAR: &str = "MOMC_THREADS";

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_VAR} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<Verdict, Failure> {
    configure_threads()?;
    let self_check = !cli.no_self_check;
    match cli.command {
        Command::Validate { model } => commands::validate(&model),
        Command::Achievable(a) => commands::achievable(&a, self_check),
        Command::Query(a) => commands::query(&a, self_check),
        Command::Qualitative(a) => commands::qualitative(&a, self_check),
        Command::Pareto(a) => commands::pareto(&a, self_check),
        Command::Vertices(a) => commands::vertices(&a, self_check),
        Command::CheckStrategy(a) => commands::check_strategy(&a),
        Command::GenHard(a) => commands::gen_hard(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Yes) => ExitCode::SUCCESS,
        Ok(Verdict::No) => ExitCode::from(1),
        Err(e) => {
            eprintln!("momc: {e}");
            ExitCode::from(2)
        }
    }
}
