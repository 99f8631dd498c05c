//! Scenario runner for squeezed-unraveling simulations.
//!
//! Subcommands: `correlations`, `sample`, `unravel`, `oracle`, `optimize`,
//! `acceptance`. Exit codes: 0 success, 2 config error, 3 statistical sanity
//! failure, 4 numerical validity failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use unravel_cli::commands::{self, CmdError, EXIT_CONFIG};
use unravel_cli::config::ScenarioConfig;

#[derive(Parser)]
#[command(name = "unravel", version, about = "Squeezed-state unraveling toolkit")]
struct Cli {
    /// Scenario config (TOML, or the JSON emitted as resolved_config.json).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for trajectory ensembles (default: available
    /// parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate correlation kernels and integrated rates.
    Correlations,
    /// Draw noise realizations and verify their ensemble statistics.
    Sample,
    /// Run the full unraveling pipeline: noise, trajectories, averages,
    /// entanglement bounds.
    Unravel,
    /// Brute-force verification against the full system+bath evolution.
    Oracle,
    /// Numerical squeezing optimization against the analytic rules.
    Optimize,
    /// Run the acceptance suite (all criteria, or one with --only).
    Acceptance {
        #[arg(long)]
        only: Option<usize>,
    },
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig, CmdError> {
    let path = cli.config.as_ref().ok_or_else(|| {
        CmdError::Config("--config <path> is required for this subcommand".into())
    })?;
    let mut cfg = ScenarioConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        // Ignore the error if a pool already exists (e.g. under a test
        // harness); determinism does not depend on the thread count.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let code = match &cli.command {
        Command::Acceptance { only } => {
            let results = unravel_cli::acceptance::run(*only);
            if results.is_empty() {
                eprintln!("no such criterion");
                EXIT_CONFIG
            } else if results.iter().all(|r| r.passed) {
                0
            } else {
                commands::EXIT_NUMERICAL
            }
        }
        command => match load_config(&cli) {
            Err(e) => {
                eprintln!("{e}");
                e.exit_code()
            }
            Ok(cfg) => {
                let run = match command {
                    Command::Correlations => commands::correlations::run(&cfg, &cli.out),
                    Command::Sample => commands::sample::run(&cfg, &cli.out),
                    Command::Unravel => commands::unravel::run(&cfg, &cli.out),
                    Command::Oracle => commands::oracle::run(&cfg, &cli.out),
                    Command::Optimize => commands::optimize::run(&cfg, &cli.out),
                    Command::Acceptance { .. } => unreachable!("handled above"),
                };
                match run {
                    Ok(code) => code,
                    Err(e) => {
                        eprintln!("{e}");
                        e.exit_code()
                    }
                }
            }
        },
    };
    ExitCode::from(u8::try_from(code.clamp(0, 255)).expect("clamped"))
}
