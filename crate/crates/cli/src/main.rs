//! Experiment front end: protocol simulations and sweeps, bound tables,
//! Monte Carlo verification, and the standalone epidemic / decay / backup /
//! leader experiments.
//!
//! Exit codes: 0 success (all requested verifications passed), 1
//! verification failure, 2 usage error, 3 I/O error.

mod bounds_cmd;
mod config;
mod fmt;
mod outputs;
mod run;
mod verify_cmd;

use clap::{Parser, Subcommand};
use config::{resolve, RunFlags};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
}

#[derive(Parser)]
#[command(
    name = "popsize",
    about = "Population-protocol size estimation: simulations, bounds, and verification experiments",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the estimation protocol at one population size.
    Simulate {
        /// Population size.
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the estimation protocol across a list of population sizes.
    Sweep {
        /// Comma-separated population sizes, e.g. 100,1000,10000.
        #[arg(long = "n-list", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Tabulate a closed-form bound over a parameter grid.
    Bounds {
        /// Formula name (see error message for the list).
        #[arg(long)]
        formula: String,
        /// Grid per parameter: key=v1,v2 or key=start:stop[:step].
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
    },
    /// Monte Carlo verification of the analytic bounds.
    Verify {
        /// Samples per distribution experiment.
        #[arg(long, default_value_t = 200_000)]
        samples: usize,
        /// Trials per simulation experiment.
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
        #[arg(long = "out-json")]
        out_json: Option<PathBuf>,
    },
    /// Measure epidemic completion times.
    Epidemic {
        #[arg(long)]
        n: usize,
        /// Subpopulation fraction executing the epidemic.
        #[arg(long, default_value_t = 1.0)]
        fraction: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
    },
    /// Worst-case count-decay experiment.
    Decay {
        #[arg(long)]
        n: usize,
        /// Initially marked agents (defaults to n).
        #[arg(long)]
        k: Option<usize>,
        /// Parallel-time window.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
    },
    /// Probability-1 exact backup protocol runs.
    Backup {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long = "out-csv")]
        out_csv: Option<PathBuf>,
    },
    /// Leader-driven terminating variant runs.
    Leader {
        #[arg(long)]
        n: Option<usize>,
        /// Phase-count multiplier of the leader's termination clock.
        #[arg(long, default_value_t = 4)]
        k2: u32,
        #[command(flatten)]
        flags: RunFlags,
    },
}

fn default_jobs(jobs: Option<usize>) -> usize {
    jobs.unwrap_or_else(|| std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1))
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Simulate { n, flags } => {
            let cfg = resolve(n, None, &flags)?;
            run::run_experiment("simulate", &cfg)?;
            Ok(true)
        }
        Command::Sweep { n_list, flags } => {
            let cfg = resolve(None, n_list, &flags)?;
            run::run_experiment("sweep", &cfg)?;
            Ok(true)
        }
        Command::Bounds { formula, params, out_csv } => {
            bounds_cmd::bounds_table(&formula, &params, out_csv)?;
            Ok(true)
        }
        Command::Verify { samples, trials, seed, jobs, out_csv, out_json } => {
            if samples == 0 || trials == 0 {
                return Err(CliError::Usage("samples and trials must be >= 1".into()));
            }
            verify_cmd::verify(&verify_cmd::VerifyOptions {
                seed,
                samples,
                trials,
                jobs: default_jobs(jobs),
                out_csv,
                out_json,
            })
        }
        Command::Epidemic { n, fraction, trials, seed, jobs, out_csv } => {
            if n < 2 || trials == 0 {
                return Err(CliError::Usage("need n >= 2 and trials >= 1".into()));
            }
            if !(0.0 < fraction && fraction <= 1.0) || (fraction * n as f64) < 2.0 {
                return Err(CliError::Usage(
                    "fraction must be in (0,1] with at least 2 subpopulation agents".into(),
                ));
            }
            verify_cmd::epidemic_cmd(n, fraction, trials, seed, default_jobs(jobs), out_csv)
        }
        Command::Decay { n, k, t, trials, seed, jobs, out_csv } => {
            let k = k.unwrap_or(n);
            if n < 2 || k > n || trials == 0 || t < 0.0 {
                return Err(CliError::Usage("need n >= 2, k <= n, t >= 0, trials >= 1".into()));
            }
            verify_cmd::decay_cmd(n, k, t, trials, seed, default_jobs(jobs), out_csv)
        }
        Command::Backup { n, trials, seed, jobs, out_csv } => {
            if n < 2 || trials == 0 {
                return Err(CliError::Usage("need n >= 2 and trials >= 1".into()));
            }
            verify_cmd::backup_cmd(n, trials, seed, default_jobs(jobs), out_csv)
        }
        Command::Leader { n, k2, flags } => {
            let cfg = resolve(n, None, &flags)?;
            if k2 == 0 {
                return Err(CliError::Usage("k2 must be >= 1".into()));
            }
            verify_cmd::leader_cmd(&verify_cmd::LeaderCmd {
                n: cfg.ns[0],
                trials: cfg.trials,
                seed: cfg.seed,
                k2,
                params: cfg.params,
                jobs: cfg.jobs,
                max_budget: cfg.max_budget,
                out_csv: cfg.out_csv.clone(),
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
