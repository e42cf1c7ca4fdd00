//! Batch experiment runner: one JSON config per run, deterministic
//! artifacts, a manifest recording version, seed and parameters.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use commands::{run, CliError, Workspace};
use config::Command;

#[derive(Parser, Debug)]
#[command(name = "shiftlab", version, about = "Tilings, block statistics and coupling distances on lattice shift spaces")]
struct Cli {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,

    /// Override the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,

    /// Directory for artifacts (created if missing).
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Cap on worker threads.
    #[arg(long)]
    threads: Option<usize>,

    /// off, error, warn, info, debug or trace.
    #[arg(long, default_value = "warn")]
    log_level: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&cli.log_level)
        .format_timestamp(None)
        .init();

    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("runtime error: {e}");
            return ExitCode::from(1);
        }
    }

    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Schema(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(m)) => {
            eprintln!("runtime error: {m}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Schema(format!("cannot read {}: {e}", cli.config.display())))?;
    let mut command: Command =
        serde_json::from_str(&text).map_err(|e| CliError::Schema(e.to_string()))?;
    if let Some(seed) = cli.seed {
        match command.seed_mut() {
            Some(slot) => *slot = seed,
            None => {
                return Err(CliError::Schema(
                    "--seed given but this command is deterministic".into(),
                ))
            }
        }
    }
    let mut ws = Workspace::new(&cli.out)?;
    run(&command, &mut ws)?;
    ws.finish(&command, cli.seed)
}
