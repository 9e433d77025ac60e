//! Monte Carlo verification harness: empirical distributions for maxima of
//! geometric variables, sums of maxima, epidemic completion times,
//! per-agent interaction counts, partition balance and count decay, each
//! compared against the closed-form bounds with explicit binomial slack.

use crate::bounds;
use crate::estimate::{partition_roles, AgentState, ProtocolParams, Role, Variant};
use crate::primitives::GeometricDraws;
use crate::rng::Rng;
use crate::sim::{parallel_time, pick_pair};

/// Empirical survival function over a set of thresholds.
#[derive(Debug, Clone)]
pub struct EmpiricalTail {
    thresholds: Vec<f64>,
    survival: Vec<f64>,
    sigmas: Vec<f64>,
    sample_count: usize,
}

impl EmpiricalTail {
    /// Estimates `Pr[X >= threshold]` for each threshold, with the exact
    /// binomial standard error per threshold. Thresholds must be sorted
    /// ascending, which makes the survival estimates non-increasing.
    pub fn from_samples(samples: &[f64], thresholds: &[f64]) -> Self {
        assert!(!thresholds.is_empty(), "need at least one threshold");
        assert!(
            thresholds.windows(2).all(|w| w[0] <= w[1]),
            "thresholds must be sorted"
        );
        let m = samples.len();
        let mut survival = Vec::with_capacity(thresholds.len());
        let mut sigmas = Vec::with_capacity(thresholds.len());
        for &t in thresholds {
            let hits = samples.iter().filter(|&&x| x >= t).count();
            let p = hits as f64 / m as f64;
            survival.push(p);
            sigmas.push((p * (1.0 - p) / m as f64).sqrt());
        }
        EmpiricalTail {
            thresholds: thresholds.to_vec(),
            survival,
            sigmas,
            sample_count: m,
        }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn survival(&self) -> &[f64] {
        &self.survival
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    pub fn sample_count(&self) -> usize {
        self.sample_count
    }
}

/// One threshold's empirical-vs-analytic comparison.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdCheck {
    pub threshold: f64,
    pub empirical: f64,
    /// Empirical survival minus the slack allowance.
    pub slacked: f64,
    pub analytic: f64,
    pub vacuous: bool,
    pub pass: bool,
}

/// Comparison of one empirical tail against one bound formula.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub bound_name: String,
    pub parameters: String,
    pub sample_count: usize,
    pub slack_sigma: f64,
    pub checks: Vec<ThresholdCheck>,
    /// True iff every threshold passed.
    pub verdict: bool,
}

/// Compares an empirical tail to an analytic bound: a threshold passes iff
/// `empirical - slack_sigma * sigma <= analytic`. Strict paper inequalities
/// are allowed to be brushed by sampling noise, never exceeded beyond it.
pub fn verify_bound(
    bound_name: &str,
    parameters: &str,
    empirical: &EmpiricalTail,
    analytic: impl Fn(f64) -> f64,
    slack_sigma: f64,
) -> BoundReport {
    let mut checks = Vec::with_capacity(empirical.thresholds.len());
    let mut verdict = true;
    for i in 0..empirical.thresholds.len() {
        let threshold = empirical.thresholds[i];
        let value = analytic(threshold);
        let slacked = empirical.survival[i] - slack_sigma * empirical.sigmas[i];
        let pass = slacked <= value;
        verdict &= pass;
        checks.push(ThresholdCheck {
            threshold,
            empirical: empirical.survival[i],
            slacked,
            analytic: value,
            vacuous: bounds::is_vacuous(value),
            pass,
        });
    }
    BoundReport {
        bound_name: bound_name.to_string(),
        parameters: parameters.to_string(),
        sample_count: empirical.sample_count,
        slack_sigma,
        checks,
        verdict,
    }
}

/// Draws `count` samples of the maximum of `n_vars` independent
/// 1/2-geometric variables.
pub fn sample_max_geometric(rng: &mut Rng, n_vars: usize, count: usize) -> Vec<u32> {
    (0..count)
        .map(|_| (0..n_vars).map(|_| rng.geometric_half()).max().unwrap_or(1))
        .collect()
}

/// Draws `count` samples of `S = sum of K` such maxima.
pub fn sample_sum_of_maxima(rng: &mut Rng, n_vars: usize, k: usize, count: usize) -> Vec<u64> {
    (0..count)
        .map(|_| {
            (0..k)
                .map(|_| (0..n_vars).map(|_| rng.geometric_half()).max().unwrap_or(1) as u64)
                .sum()
        })
        .collect()
}

pub fn sample_mean_u32(samples: &[u32]) -> f64 {
    samples.iter().map(|&x| x as u64).sum::<u64>() as f64 / samples.len() as f64
}

/// Runs a pure max-propagation epidemic seeded in one agent of the first
/// `floor(fraction * n)` agents; only pairs drawn inside that subpopulation
/// execute the transition. Returns the parallel time (counted over the
/// whole population) until the subpopulation is fully infected.
pub fn measure_epidemic_time(n: usize, subpop_fraction: f64, rng: &mut Rng) -> f64 {
    let a = ((subpop_fraction * n as f64).floor() as usize).min(n);
    assert!(a >= 2, "subpopulation must have at least 2 agents");
    let mut infected = vec![false; n];
    infected[0] = true;
    let mut count = 1usize;
    let mut interactions = 0u64;
    while count < a {
        let rec = pick_pair(rng, n, interactions).expect("n >= 2");
        interactions += 1;
        if rec.receiver < a && rec.sender < a && (infected[rec.receiver] || infected[rec.sender]) {
            if !infected[rec.receiver] {
                infected[rec.receiver] = true;
                count += 1;
            }
            if !infected[rec.sender] {
                infected[rec.sender] = true;
                count += 1;
            }
        }
    }
    parallel_time(interactions, n)
}

/// Runs the bare scheduler for `window_parallel_time * n` interactions and
/// returns the maximum number of interactions any single agent took part
/// in.
pub fn measure_interaction_counts(n: usize, window_parallel_time: f64, rng: &mut Rng) -> u64 {
    let total = (window_parallel_time * n as f64).round() as u64;
    let mut counts = vec![0u64; n];
    for k in 0..total {
        let rec = pick_pair(rng, n, k).expect("n >= 2");
        counts[rec.receiver] += 1;
        counts[rec.sender] += 1;
    }
    counts.into_iter().max().unwrap_or(0)
}

/// Worst-case consumption model for count decay: `k` marked agents; every
/// interaction unmarks any marked participant (both, if both were marked).
/// Simulates `t * n` interactions and returns the minimum marked count
/// observed over the window.
pub fn measure_count_decay(n: usize, k: usize, t: f64, rng: &mut Rng) -> u64 {
    assert!(k <= n);
    let mut marked = vec![false; n];
    marked[..k].fill(true);
    let mut count = k as u64;
    let mut min_count = count;
    let total = (t * n as f64).round() as u64;
    for i in 0..total {
        let rec = pick_pair(rng, n, i).expect("n >= 2");
        if marked[rec.receiver] {
            marked[rec.receiver] = false;
            count -= 1;
        }
        if marked[rec.sender] {
            marked[rec.sender] = false;
            count -= 1;
        }
        min_count = min_count.min(count);
    }
    min_count
}

/// Balls-into-bins with `k` of `n` bins initially empty: throws `m` balls
/// uniformly and returns how many of those bins remain empty.
pub fn measure_empty_bins(n: usize, k: usize, m: u64, rng: &mut Rng) -> u64 {
    assert!(k <= n);
    let mut empty = vec![false; n];
    empty[..k].fill(true);
    let mut count = k as u64;
    for _ in 0..m {
        let bin = rng.next_index(n);
        if empty[bin] {
            empty[bin] = false;
            count -= 1;
        }
    }
    count
}

/// Runs only the role-partitioning subprotocol until no X agent remains and
/// returns the count of A agents.
pub fn measure_partition_count(n: usize, rng: &mut Rng) -> usize {
    let params = ProtocolParams::faithful(Variant::As);
    let mut agents = vec![AgentState::initial(); n];
    let mut x_left = n;
    let mut k = 0u64;
    while x_left > 0 {
        let rec = pick_pair(rng, n, k).expect("n >= 2");
        k += 1;
        let (lo, hi) = if rec.receiver < rec.sender {
            (rec.receiver, rec.sender)
        } else {
            (rec.sender, rec.receiver)
        };
        let (head, tail) = agents.split_at_mut(hi);
        let (receiver, sender) = if rec.receiver < rec.sender {
            (&mut head[lo], &mut tail[0])
        } else {
            (&mut tail[0], &mut head[lo])
        };
        let before = (receiver.role == Role::X) as usize + (sender.role == Role::X) as usize;
        partition_roles(receiver, sender, rng, &params);
        let after = (receiver.role == Role::X) as usize + (sender.role == Role::X) as usize;
        x_left -= before - after;
    }
    agents.iter().filter(|a| a.role == Role::A).count()
}

/// Default statistical slack, in binomial standard deviations.
pub const DEFAULT_SLACK_SIGMA: f64 = 3.0;

/// Tail of |M - center| for max-of-geometrics samples, at integer lambda
/// offsets, verified against the two-sided sub-exponential bound.
pub fn verify_half_geom_subexp(rng: &mut Rng, n_vars: usize, count: usize, lambdas: &[f64]) -> BoundReport {
    let samples = sample_max_geometric(rng, n_vars, count);
    let (low, high) = bounds::expected_max_interval(n_vars as u64, 0.5).expect("n_vars >= 50");
    let center = 0.5 * (low + high);
    let deviations: Vec<f64> = samples.iter().map(|&m| (m as f64 - center).abs()).collect();
    let tail = EmpiricalTail::from_samples(&deviations, lambdas);
    verify_bound(
        "half_geom_subexp_tail",
        &format!("N={n_vars}"),
        &tail,
        bounds::half_geom_subexp_tail,
        DEFAULT_SLACK_SIGMA,
    )
}

/// Checks the one-shot range bounds `Pr[M >= 2 log2 N]` and
/// `Pr[M <= log2 N - log2 ln N]`, both against `2/N` (the union bound for
/// flips-including-the-head geometrics).
pub fn verify_max_geom_range(rng: &mut Rng, n_vars: usize, count: usize) -> (BoundReport, BoundReport) {
    let samples = sample_max_geometric(rng, n_vars, count);
    let log2n = (n_vars as f64).log2();
    let bound = 2.0 / n_vars as f64;

    let upper_threshold = 2.0 * log2n;
    let as_f64: Vec<f64> = samples.iter().map(|&m| m as f64).collect();
    let upper_tail = EmpiricalTail::from_samples(&as_f64, &[upper_threshold]);
    let upper = verify_bound(
        "max_geom_range_upper",
        &format!("N={n_vars}, threshold=2 log2 N"),
        &upper_tail,
        |_| bound,
        DEFAULT_SLACK_SIGMA,
    );

    let lower_threshold = log2n - (n_vars as f64).ln().log2();
    // Survival machinery measures Pr[X >= t]; use negated samples for the
    // lower tail Pr[M <= t] = Pr[-M >= -t].
    let negated: Vec<f64> = samples.iter().map(|&m| -(m as f64)).collect();
    let lower_tail = EmpiricalTail::from_samples(&negated, &[-lower_threshold]);
    let lower = verify_bound(
        "max_geom_range_lower",
        &format!("N={n_vars}, threshold=log2 N - log2 ln N"),
        &lower_tail,
        |_| bound,
        DEFAULT_SLACK_SIGMA,
    );
    (upper, lower)
}

/// Frequency of |S/K - log2 N| >= 4.7 over `count` sums, against `2/N`.
pub fn verify_average_concentration(rng: &mut Rng, n_vars: usize, k: usize, count: usize) -> BoundReport {
    let sums = sample_sum_of_maxima(rng, n_vars, k, count);
    let log2n = (n_vars as f64).log2();
    let deviations: Vec<f64> = sums
        .iter()
        .map(|&s| (s as f64 / k as f64 - log2n).abs())
        .collect();
    let tail = EmpiricalTail::from_samples(&deviations, &[4.7]);
    let analytic = bounds::average_estimate_tail(n_vars as u64, k as u32).expect("valid K");
    verify_bound(
        "average_estimate_tail",
        &format!("N={n_vars}, K={k}"),
        &tail,
        |_| analytic,
        DEFAULT_SLACK_SIGMA,
    )
}

/// Empirical full-population epidemic times against the completion-time
/// tail at each alpha in the grid.
pub fn verify_epidemic_tail(rng: &mut Rng, n: usize, trials: usize, alphas: &[f64]) -> BoundReport {
    let ln_n = (n as f64).ln();
    let times: Vec<f64> = (0..trials)
        .map(|_| measure_epidemic_time(n, 1.0, rng) / ln_n)
        .collect();
    let tail = EmpiricalTail::from_samples(&times, alphas);
    verify_bound(
        "epidemic_tail",
        &format!("n={n}"),
        &tail,
        |alpha| bounds::epidemic_tail(n as u64, alpha),
        DEFAULT_SLACK_SIGMA,
    )
}
