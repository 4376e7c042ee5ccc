//! Command-line front end for the chain-contraction Picard solvers.
//!
//! Subcommands:
//! - `solve --config <path>` — run one experiment from a JSON config,
//!   print the convergence table, optionally write CSV/JSON reports.
//! - `bench --registry <name|all>` — run the rate-comparison harness on
//!   built-in problems (plus the `sqrt2` demo of the generic engine).
//! - `validate --config <path>` — schema and consistency check only.
//!
//! Exit codes: 0 success; 1 invalid configuration; 2 solver failure;
//! 3 a reported distance exceeded its a-priori bound.

mod config;
mod expr;
mod run;

use clap::{Parser, Subcommand};
use config::{Mode, RunConfig};
use run::{CliError, Hooks};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "picard",
    version,
    about = "Picard iteration with factorial error certificates"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a JSON config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's mode (real-grid | real-exact | complex).
        #[arg(long)]
        mode: Option<Mode>,
        /// Override the config's iteration depth.
        #[arg(long)]
        n_max: Option<usize>,
        /// Override the CSV report path.
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Override the JSON report path.
        #[arg(long)]
        out_json: Option<PathBuf>,
        /// Fault-injection hook: scale the contraction factors to force a
        /// bound violation (for testing the exit-code contract).
        #[arg(long, hide = true)]
        corrupt_kappa: Option<f64>,
    },
    /// Compare Picard, the geometric bound and Euler on built-in problems.
    Bench {
        /// Registry entry name, `sqrt2`, or `all`.
        #[arg(long)]
        registry: String,
        #[arg(long, default_value_t = 10)]
        n_max: usize,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
    },
    /// Check a config file without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load_config(path: &PathBuf) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
    Ok(RunConfig::from_json(&text)?)
}

fn real_main() -> Result<(), CliError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve {
            config,
            mode,
            n_max,
            out_csv,
            out_json,
            corrupt_kappa,
        } => {
            let mut cfg = load_config(&config)?;
            if let Some(mode) = mode {
                cfg.mode = mode;
                cfg.validate()?;
            }
            if let Some(n) = n_max {
                cfg.solver.n_max = n;
            }
            if let Some(path) = out_csv {
                cfg.output.csv = Some(path);
            }
            if let Some(path) = out_json {
                cfg.output.json = Some(path);
            }
            let hooks = Hooks {
                kappa_scale: corrupt_kappa.unwrap_or(1.0),
            };
            run::run_experiment(&cfg, hooks)?;
            Ok(())
        }
        Command::Bench {
            registry,
            n_max,
            out_csv,
            out_json,
        } => run::run_bench(&registry, n_max, out_csv.as_deref(), out_json.as_deref()),
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            if !cfg.problem.rhs.is_empty() {
                for (i, tree) in cfg.parse_rhs()?.iter().enumerate() {
                    println!("rhs[{i}] parses to {}", expr::pretty(tree));
                }
            }
            println!("config ok: {}", config.display());
            Ok(())
        }
    }
}

fn main() {
    if let Err(err) = real_main() {
        eprintln!("{err}");
        std::process::exit(err.exit_code());
    }
}
