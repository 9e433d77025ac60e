//! Orchestration of simulation experiments: trials run concurrently
//! (seeded as base seed + trial index), results are sorted by (n, trial)
//! before any output is written, so concurrency never changes file
//! contents.

use crate::config::{ExperimentConfig, ProfileArg};
use crate::outputs::{
    result_csv, scatter_svg, summarize_groups, to_canonical_json, write_text, ExperimentSummary,
    ResultRow,
};
use crate::CliError;
use popsize::estimate::{run_trial, TrialConfig, Variant};
use rayon::prelude::*;

pub fn trial_rows(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Io(format!("cannot build thread pool: {e}")))?;
    let jobs: Vec<(usize, usize)> = cfg
        .ns
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();
    let mut rows: Vec<ResultRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, trial)| {
                let seed = cfg.seed.wrapping_add(trial as u64);
                let trial_cfg = TrialConfig {
                    n,
                    seed,
                    params: cfg.params,
                    max_interactions: cfg.max_budget,
                    snapshot_every: cfg.snapshot_every,
                };
                let out = run_trial(&trial_cfg).map_err(|e| CliError::Usage(e.to_string()))?;
                let r = out.result;
                Ok(ResultRow {
                    n,
                    trial,
                    seed,
                    converged: r.converged,
                    convergence_parallel_time: r.convergence_parallel_time,
                    output_value: if r.converged {
                        r.common_output().map(|o| o.value())
                    } else {
                        None
                    },
                    error: if r.converged { r.error } else { None },
                    restarts: r.restart_count,
                    clk_max: r.field_ranges.clk_max,
                    gr_max: r.field_ranges.gr_max,
                    time_max: r.field_ranges.time_max,
                    epoch_max: r.field_ranges.epoch_max,
                    sum_max: r.field_ranges.sum_max,
                    role_count_a: r.role_counts.a,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    rows.sort_by_key(|r| (r.n, r.trial));
    Ok(rows)
}

pub fn run_experiment(command: &str, cfg: &ExperimentConfig) -> Result<(), CliError> {
    let rows = trial_rows(cfg)?;
    let summary = ExperimentSummary {
        command: command.to_string(),
        variant: match cfg.params.variant {
            Variant::As => "as".into(),
            Variant::Af => "af".into(),
        },
        profile: match cfg.profile {
            ProfileArg::Faithful => "faithful".into(),
            ProfileArg::Fast => "fast".into(),
        },
        cte: cfg.params.cte,
        epoch_multiplier: cfg.params.epoch_multiplier,
        seed: cfg.seed,
        trials_per_n: cfg.trials,
        groups: summarize_groups(&rows),
    };

    if let Some(path) = &cfg.out_csv {
        write_text(path, &result_csv(&rows))?;
    }
    if let Some(path) = &cfg.out_json {
        write_text(path, &to_canonical_json(&summary))?;
    }
    if let Some(path) = &cfg.out_svg {
        write_text(path, &scatter_svg(&rows))?;
    }

    for g in &summary.groups {
        println!(
            "n={:>7}  trials={}  converged={}/{}  median_time={}  mean_time={}  max_error={}",
            g.n,
            g.trials,
            g.converged,
            g.trials,
            g.median_parallel_time.map(crate::fmt::fmt_real).unwrap_or_else(|| "-".into()),
            g.mean_parallel_time.map(crate::fmt::fmt_real).unwrap_or_else(|| "-".into()),
            g.max_error.map(crate::fmt::fmt_real).unwrap_or_else(|| "-".into()),
        );
    }
    Ok(())
}
