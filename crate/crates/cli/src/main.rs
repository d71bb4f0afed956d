use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use quasilin_cli::{load_config, run_scenario, CliError, Command};

/// Quasi-linear elliptic solver and bound-verification scenarios.
#[derive(Debug, Parser)]
#[command(name = "quasilin", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,
    /// Scenario file (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; created if missing.
    #[arg(long, short, default_value = "out")]
    out: PathBuf,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let (cfg, base) = load_config(&args.config)?;
    let run = || run_scenario(args.command, &cfg, &base, &args.out);
    let outcome = match args.threads {
        Some(0) => return Err(CliError::Validation("--threads must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Validation(e.to_string()))?
            .install(run)?,
        None => run()?,
    };
    print!("{}", outcome.summary.render());
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
