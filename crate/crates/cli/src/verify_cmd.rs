//! The `verify` subcommand: a battery of Monte Carlo experiments checked
//! against the closed-form bounds, plus the standalone experiment commands
//! (epidemic, decay, backup, leader). Each prints one pass/fail line per
//! check; a failed check makes the process exit nonzero.

use crate::fmt::fmt_real;
use crate::outputs::{to_canonical_json, write_text};
use crate::CliError;
use popsize::bounds;
use popsize::estimate::ProtocolParams;
use popsize::rng::Rng;
use popsize::statlab::{
    self, measure_count_decay, measure_epidemic_time, measure_interaction_counts,
    measure_partition_count, sample_max_geometric, sample_mean_u32, BoundReport,
    DEFAULT_SLACK_SIGMA,
};
use popsize::variants::{run_backup, run_leader, LeaderParams};
use rayon::prelude::*;
use serde::Serialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

fn print_check(line: &CheckLine) {
    println!(
        "[{}] {}: {}",
        if line.pass { "PASS" } else { "FAIL" },
        line.name,
        line.detail
    );
}

fn report_to_line(report: &BoundReport) -> CheckLine {
    let worst = report
        .checks
        .iter()
        .map(|c| c.slacked - c.analytic)
        .fold(f64::NEG_INFINITY, f64::max);
    CheckLine {
        name: format!("{} {}", report.bound_name, report.parameters),
        detail: format!(
            "{} thresholds, samples={}, worst slacked-minus-bound={}",
            report.checks.len(),
            report.sample_count,
            fmt_real(worst)
        ),
        pass: report.verdict,
    }
}

pub struct VerifyOptions {
    pub seed: u64,
    pub samples: usize,
    pub trials: usize,
    pub jobs: usize,
    pub out_csv: Option<PathBuf>,
    pub out_json: Option<PathBuf>,
}

/// Runs the full bound-verification battery. Returns false if any check
/// failed.
pub fn verify(opts: &VerifyOptions) -> Result<bool, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let mut lines: Vec<CheckLine> = Vec::new();
    let mut reports: Vec<BoundReport> = Vec::new();
    let n_vars = 1024usize;

    // Expected maximum enclosure.
    {
        let mut rng = Rng::seeded(opts.seed);
        let samples = sample_max_geometric(&mut rng, n_vars, opts.samples);
        let mean = sample_mean_u32(&samples);
        let (low, high) = bounds::expected_max_interval(n_vars as u64, 0.5).unwrap();
        // Allow 4 standard errors of sampling noise around the enclosure.
        let se = 1.87 / (opts.samples as f64).sqrt();
        let pass = mean > low - 4.0 * se && mean < high + 4.0 * se;
        lines.push(CheckLine {
            name: format!("expected_max_interval N={n_vars}"),
            detail: format!(
                "mean={} enclosure=({}, {})",
                fmt_real(mean),
                fmt_real(low),
                fmt_real(high)
            ),
            pass,
        });
    }

    // Two-sided sub-exponential tail.
    {
        let mut rng = Rng::seeded(opts.seed.wrapping_add(1));
        let lambdas: Vec<f64> = (1..=12).map(|i| i as f64).collect();
        let report = statlab::verify_half_geom_subexp(&mut rng, n_vars, opts.samples, &lambdas);
        lines.push(report_to_line(&report));
        reports.push(report);
    }

    // One-shot range bounds.
    {
        let mut rng = Rng::seeded(opts.seed.wrapping_add(2));
        let (upper, lower) = statlab::verify_max_geom_range(&mut rng, n_vars, opts.samples);
        lines.push(report_to_line(&upper));
        lines.push(report_to_line(&lower));
        reports.push(upper);
        reports.push(lower);
    }

    // Averaged-estimate concentration.
    {
        let mut rng = Rng::seeded(opts.seed.wrapping_add(3));
        let sums = (opts.samples / 100).max(500);
        let report = statlab::verify_average_concentration(&mut rng, n_vars, 40, sums);
        lines.push(report_to_line(&report));
        reports.push(report);
    }

    // Epidemic completion tail.
    {
        let mut rng = Rng::seeded(opts.seed.wrapping_add(4));
        let report = statlab::verify_epidemic_tail(&mut rng, 2000, opts.trials, &[6.0, 8.0, 12.0]);
        lines.push(report_to_line(&report));
        reports.push(report);
    }

    // Subpopulation epidemic within 24 ln n.
    {
        let n = 3000usize;
        let ln_n = (n as f64).ln();
        let seed = opts.seed.wrapping_add(5);
        let times: Vec<f64> = pool.install(|| {
            (0..opts.trials as u64)
                .into_par_iter()
                .map(|t| measure_epidemic_time(n, 1.0 / 3.0, &mut Rng::seeded(seed.wrapping_add(t))))
                .collect()
        });
        let exceed = times.iter().filter(|&&t| t > 24.0 * ln_n).count();
        lines.push(CheckLine {
            name: format!("partial_epidemic n={n} fraction=1/3"),
            detail: format!(
                "{exceed}/{} exceed 24 ln n = {} (bound 27/n^3 = {})",
                times.len(),
                fmt_real(24.0 * ln_n),
                fmt_real(27.0 / (n as f64).powi(3)),
            ),
            pass: exceed == 0,
        });
    }

    // Per-agent interaction counts in a 24 ln n window.
    {
        let n = 2000usize;
        let ln_n = (n as f64).ln();
        let (d, _) = bounds::interaction_count_bound(24.0, n as u64).unwrap();
        let seed = opts.seed.wrapping_add(6);
        let maxima: Vec<u64> = pool.install(|| {
            (0..opts.trials as u64)
                .into_par_iter()
                .map(|t| {
                    measure_interaction_counts(n, 24.0 * ln_n, &mut Rng::seeded(seed.wrapping_add(t)))
                })
                .collect()
        });
        let limit = d.ceil() * ln_n;
        let exceed = maxima.iter().filter(|&&m| m as f64 > limit).count();
        lines.push(CheckLine {
            name: format!("interaction_counts n={n} window=24 ln n"),
            detail: format!(
                "{exceed}/{} agents-maxima exceed {} (= ceil(D) ln n, D={})",
                maxima.len(),
                fmt_real(limit),
                fmt_real(d)
            ),
            pass: exceed == 0,
        });
    }

    // Partition balance.
    {
        let n = 10_000usize;
        let seed = opts.seed.wrapping_add(7);
        let counts: Vec<usize> = pool.install(|| {
            (0..opts.trials as u64)
                .into_par_iter()
                .map(|t| measure_partition_count(n, &mut Rng::seeded(seed.wrapping_add(t))))
                .collect()
        });
        let a = (n as f64 * (n as f64).ln()).sqrt();
        let exceed = counts
            .iter()
            .filter(|&&c| (c as f64 - n as f64 / 2.0).abs() > a)
            .count();
        lines.push(CheckLine {
            name: format!("partition_balance n={n}"),
            detail: format!(
                "{exceed}/{} deviate beyond sqrt(n ln n) = {} (bound 2/n^2)",
                counts.len(),
                fmt_real(a)
            ),
            pass: exceed == 0,
        });
    }

    // Count decay.
    {
        let n = 10_000usize;
        let seed = opts.seed.wrapping_add(8);
        let mins: Vec<u64> = pool.install(|| {
            (0..opts.trials as u64)
                .into_par_iter()
                .map(|t| measure_count_decay(n, n, 1.0, &mut Rng::seeded(seed.wrapping_add(t))))
                .collect()
        });
        let floor = n as f64 / 81.0;
        let below = mins.iter().filter(|&&m| (m as f64) < floor).count();
        lines.push(CheckLine {
            name: format!("count_decay n=k={n} T=1"),
            detail: format!(
                "{below}/{} trials dip below k/81 = {} (bound 2^(-k/81))",
                mins.len(),
                fmt_real(floor)
            ),
            pass: below == 0,
        });
    }

    for line in &lines {
        print_check(line);
    }
    let all_pass = lines.iter().all(|l| l.pass);

    if let Some(path) = &opts.out_csv {
        let mut csv = String::from("bound,parameters,threshold,empirical,slacked,analytic,vacuous,pass\n");
        for r in &reports {
            for c in &r.checks {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    r.bound_name,
                    r.parameters.replace(',', ";"),
                    fmt_real(c.threshold),
                    fmt_real(c.empirical),
                    fmt_real(c.slacked),
                    fmt_real(c.analytic),
                    c.vacuous,
                    c.pass
                ));
            }
        }
        write_text(path, &csv)?;
    }
    if let Some(path) = &opts.out_json {
        #[derive(Serialize)]
        struct VerifySummary {
            all_pass: bool,
            checks: Vec<CheckLine>,
            samples: usize,
            trials: usize,
            seed: u64,
            slack_sigma: f64,
        }
        write_text(
            path,
            &to_canonical_json(&VerifySummary {
                all_pass,
                checks: lines.clone(),
                samples: opts.samples,
                trials: opts.trials,
                seed: opts.seed,
                slack_sigma: DEFAULT_SLACK_SIGMA,
            }),
        )?;
    }
    Ok(all_pass)
}

pub fn epidemic_cmd(
    n: usize,
    fraction: f64,
    trials: usize,
    seed: u64,
    jobs: usize,
    out_csv: Option<PathBuf>,
) -> Result<bool, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let times: Vec<f64> = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| measure_epidemic_time(n, fraction, &mut Rng::seeded(seed.wrapping_add(t))))
            .collect()
    });
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    if let Some(path) = &out_csv {
        let mut csv = String::from("n,fraction,trial,seed,parallel_time\n");
        for (t, time) in times.iter().enumerate() {
            csv.push_str(&format!(
                "{n},{},{t},{},{}\n",
                fmt_real(fraction),
                seed.wrapping_add(t as u64),
                fmt_real(*time)
            ));
        }
        write_text(path, &csv)?;
    }
    let pass = if fraction >= 1.0 {
        let expect = bounds::epidemic_expected_time(n as u64).unwrap();
        let ok = (mean - expect).abs() / expect < 0.1;
        println!(
            "[{}] epidemic n={n}: mean={} expected={} ({} trials)",
            if ok { "PASS" } else { "FAIL" },
            fmt_real(mean),
            fmt_real(expect),
            trials
        );
        ok
    } else {
        let ln_n = (n as f64).ln();
        let exceed = times.iter().filter(|&&t| t > 24.0 * ln_n).count();
        let ok = exceed == 0;
        println!(
            "[{}] epidemic n={n} fraction={}: mean={} exceedances of 24 ln n: {exceed}/{trials}",
            if ok { "PASS" } else { "FAIL" },
            fmt_real(fraction),
            fmt_real(mean),
        );
        ok
    };
    Ok(pass)
}

pub fn decay_cmd(
    n: usize,
    k: usize,
    t: f64,
    trials: usize,
    seed: u64,
    jobs: usize,
    out_csv: Option<PathBuf>,
) -> Result<bool, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let mins: Vec<u64> = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|i| measure_count_decay(n, k, t, &mut Rng::seeded(seed.wrapping_add(i))))
            .collect()
    });
    if let Some(path) = &out_csv {
        let mut csv = String::from("n,k,t,trial,seed,min_count\n");
        for (i, m) in mins.iter().enumerate() {
            csv.push_str(&format!(
                "{n},{k},{},{i},{},{m}\n",
                fmt_real(t),
                seed.wrapping_add(i as u64)
            ));
        }
        write_text(path, &csv)?;
    }
    let floor = k as f64 / 81.0;
    let below = mins.iter().filter(|&&m| (m as f64) < floor).count();
    let bound = bounds::count_decay_bound(k as u64, 1.0 / 81.0, t).unwrap();
    let pass = below == 0;
    println!(
        "[{}] decay n={n} k={k} T={}: min_count min={} floor k/81={} dips={below}/{trials} (bound {})",
        if pass { "PASS" } else { "FAIL" },
        fmt_real(t),
        mins.iter().min().copied().unwrap_or(0),
        fmt_real(floor),
        fmt_real(bounds::clamp_probability(bound)),
    );
    Ok(pass)
}

pub fn backup_cmd(
    n: usize,
    trials: usize,
    seed: u64,
    jobs: usize,
    out_csv: Option<PathBuf>,
) -> Result<bool, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let budget = 10_000u64 * n as u64;
    let runs: Vec<_> = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| run_backup(n, seed.wrapping_add(t), budget).map_err(|e| CliError::Usage(e.to_string())))
            .collect::<Result<Vec<_>, _>>()
    })?;
    if let Some(path) = &out_csv {
        let mut csv = String::from("n,trial,seed,stabilized,k_ex,live_count,parallel_time\n");
        for (t, r) in runs.iter().enumerate() {
            csv.push_str(&format!(
                "{n},{t},{},{},{},{},{}\n",
                seed.wrapping_add(t as u64),
                r.stabilized,
                r.k_ex,
                r.live_count,
                fmt_real(r.parallel_time)
            ));
        }
        write_text(path, &csv)?;
    }
    let expect = (n as f64).log2().ceil() as u32;
    let pass = runs.iter().all(|r| r.stabilized && r.k_ex == expect);
    println!(
        "[{}] backup n={n}: k_ex={} expected={expect} stabilized={}/{trials}",
        if pass { "PASS" } else { "FAIL" },
        runs.first().map(|r| r.k_ex).unwrap_or(0),
        runs.iter().filter(|r| r.stabilized).count(),
    );
    Ok(pass)
}

pub struct LeaderCmd {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub k2: u32,
    pub params: ProtocolParams,
    pub jobs: usize,
    pub max_budget: Option<u64>,
    pub out_csv: Option<PathBuf>,
}

pub fn leader_cmd(cmd: &LeaderCmd) -> Result<bool, CliError> {
    let LeaderCmd { n, trials, seed, k2, params, jobs, max_budget, out_csv } = cmd;
    let (n, trials, seed, k2) = (*n, *trials, *seed, *k2);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(*jobs)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let budget = max_budget.unwrap_or_else(|| popsize::estimate::default_budget(n));
    let lparams = LeaderParams { k2 };
    let runs: Vec<_> = pool.install(|| {
        (0..trials as u64)
            .into_par_iter()
            .map(|t| {
                run_leader(n, seed.wrapping_add(t), params, &lparams, budget)
                    .map_err(|e| CliError::Usage(e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    if let Some(path) = out_csv {
        let mut csv =
            String::from("n,trial,seed,terminated_at,converged_at,terminated_after_convergence,violations\n");
        for (t, r) in runs.iter().enumerate() {
            csv.push_str(&format!(
                "{n},{t},{},{},{},{},{}\n",
                seed.wrapping_add(t as u64),
                r.terminated_at.map(fmt_real).unwrap_or_default(),
                r.converged_at.map(fmt_real).unwrap_or_default(),
                r.terminated_after_convergence,
                r.contract_violations
            ));
        }
        write_text(path, &csv)?;
    }
    let good = runs
        .iter()
        .filter(|r| r.terminated_at.is_some() && r.terminated_after_convergence)
        .count();
    let frac = good as f64 / runs.len() as f64;
    let pass = frac >= 0.95 && runs.iter().all(|r| r.contract_violations == 0);
    println!(
        "[{}] leader n={n} k2={k2}: terminated-after-convergence {good}/{trials} ({})",
        if pass { "PASS" } else { "FAIL" },
        fmt_real(frac),
    );
    Ok(pass)
}
