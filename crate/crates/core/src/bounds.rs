//! Closed-form probability bounds used by the protocol analysis: epidemic
//! completion tails, per-agent interaction counts, partition balance,
//! sub-exponential machinery for maxima of geometric random variables, and
//! the balls-into-bins count-decay bounds.
//!
//! Every function returns the raw formula value, which may exceed 1
//! (a vacuous bound); see [`is_vacuous`] and [`clamp_probability`].

use thiserror::Error;

/// Euler-Mascheroni constant.
pub const GAMMA: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error, PartialEq)]
pub enum BoundError {
    #[error("harmonic number undefined for n = 0")]
    HarmonicZero,
    #[error("|s| = {s} outside the MGF bound domain [-1/(2 beta), 1/(2 beta)] = [..{limit}]")]
    MgfOutOfDomain { s: f64, limit: f64 },
    #[error("formula requires N >= 50, got {0}")]
    TooFewVariables(u64),
    #[error("formula requires q >= 1/e, got {0}")]
    QTooSmall(f64),
    #[error("formula requires lambda > 0, got {0}")]
    NonPositiveLambda(f64),
    #[error("average bound needs K >= 4 log2 N: required K >= {required}, got {got}")]
    KTooSmall { required: u32, got: u32 },
    #[error("interaction-count bound requires C >= 3, got {0}")]
    CTooSmall(f64),
    #[error("decay bounds require delta in (0, 1/2], got {0}")]
    BadDelta(f64),
    #[error("partial epidemic bound requires c >= 1, got {0}")]
    BadSubpopulationRatio(f64),
}

/// A bound above 1 carries no information.
pub fn is_vacuous(bound: f64) -> bool {
    bound >= 1.0
}

/// Explicit clamp for reporting a bound as a probability.
pub fn clamp_probability(bound: f64) -> f64 {
    bound.min(1.0)
}

/// Parameters of an alpha-beta-sub-exponential variable:
/// `Pr[|X - E X| >= lambda] <= alpha * exp(-lambda / beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubExpParams {
    pub alpha: f64,
    pub beta: f64,
}

/// The sub-exponential parameters of a maximum of at least 50 independent
/// 1/2-geometric variables.
pub const HALF_GEOM_MAX: SubExpParams = SubExpParams { alpha: 3.31, beta: 2.0 };

/// Fixed constants of the expected-maximum estimates.
#[derive(Debug, Clone, Copy)]
pub struct MaxGeomConstants {
    pub gamma: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub delta0: f64,
}

impl MaxGeomConstants {
    pub const fn new() -> Self {
        let gamma = GAMMA;
        let eps1 = 0.01;
        let eps2 = 0.0006;
        // delta0 = 1/2 + gamma/ln 2 - eps2
        let delta0 = 0.5 + gamma / core::f64::consts::LN_2 - eps2;
        MaxGeomConstants { gamma, eps1, eps2, delta0 }
    }
}

impl Default for MaxGeomConstants {
    fn default() -> Self {
        Self::new()
    }
}

pub const MAX_GEOM: MaxGeomConstants = MaxGeomConstants::new();

/// The n'th harmonic number, `sum_{k=1}^{n} 1/k`.
pub fn harmonic(n: u64) -> Result<f64, BoundError> {
    if n == 0 {
        return Err(BoundError::HarmonicZero);
    }
    // Summing ascending k keeps each addend's magnitude comparable to the
    // running error; at desk scales (n <= 1e7) the f64 error is negligible.
    Ok((1..=n).map(|k| 1.0 / k as f64).sum())
}

/// MGF bound for a centered sub-exponential variable:
/// `E[exp(s (X - E X))] <= 1 + 2 alpha beta^2 s^2` for `|s| <= 1/(2 beta)`.
pub fn subexp_mgf_bound(params: SubExpParams, s: f64) -> Result<f64, BoundError> {
    let limit = 1.0 / (2.0 * params.beta);
    if s.abs() > limit {
        return Err(BoundError::MgfOutOfDomain { s, limit });
    }
    Ok(1.0 + 2.0 * params.alpha * params.beta * params.beta * s * s)
}

/// Chernoff bound for a sum of K i.i.d. sub-exponential variables:
/// `Pr[|S - E S| >= t] <= 2 (1 + alpha/2)^K / exp(t / (2 beta))`.
pub fn chernoff_sum_bound(params: SubExpParams, k: u32, t: f64) -> f64 {
    2.0 * (1.0 + params.alpha / 2.0).powi(k as i32) * (-t / (2.0 * params.beta)).exp()
}

/// Two-sided enclosure of `E[max of N p-geometrics]` with `q = 1 - p`:
/// `((ln N + gamma)/ln(1/q) + 1/2 - eps2,
///   (ln N + gamma + eps1)/ln(1/q) + 1/2 + eps2)`.
/// For q = 1/2 the interval lies inside `(log2 N + 1, log2 N + 3/2)`.
pub fn expected_max_interval(n_vars: u64, q: f64) -> Result<(f64, f64), BoundError> {
    if n_vars < 50 {
        return Err(BoundError::TooFewVariables(n_vars));
    }
    if q < 1.0 / core::f64::consts::E {
        return Err(BoundError::QTooSmall(q));
    }
    let c = MAX_GEOM;
    let ln_n = (n_vars as f64).ln();
    let ln_inv_q = (1.0 / q).ln();
    let low = (ln_n + c.gamma) / ln_inv_q + 0.5 - c.eps2;
    let high = (ln_n + c.gamma + c.eps1) / ln_inv_q + 0.5 + c.eps2;
    Ok((low, high))
}

/// Lower-deviation tail of the maximum:
/// `Pr[E M - M >= lambda] <= exp(-q^(1/2 + eps2 - (gamma+eps1) ln q - lambda))`.
pub fn max_geom_lower_tail(q: f64, lambda: f64) -> Result<f64, BoundError> {
    check_q_lambda(q, lambda)?;
    let c = MAX_GEOM;
    let exponent = 0.5 + c.eps2 - (c.gamma + c.eps1) * q.ln() - lambda;
    Ok((-q.powf(exponent)).exp())
}

/// Upper-deviation tail of the maximum:
/// `Pr[M - E M >= lambda] <= q^(lambda - 1/2 - eps2 - gamma ln q)
///                           + q^(2 lambda - 1 - 2 eps2 - 2 gamma ln q)`.
pub fn max_geom_upper_tail(q: f64, lambda: f64) -> Result<f64, BoundError> {
    check_q_lambda(q, lambda)?;
    let c = MAX_GEOM;
    let e1 = lambda - 0.5 - c.eps2 - c.gamma * q.ln();
    let e2 = 2.0 * lambda - 1.0 - 2.0 * c.eps2 - 2.0 * c.gamma * q.ln();
    Ok(q.powf(e1) + q.powf(e2))
}

fn check_q_lambda(q: f64, lambda: f64) -> Result<(), BoundError> {
    if q < 1.0 / core::f64::consts::E {
        return Err(BoundError::QTooSmall(q));
    }
    if lambda <= 0.0 {
        return Err(BoundError::NonPositiveLambda(lambda));
    }
    Ok(())
}

/// Two-sided sub-exponential tail of a maximum of at least 50 independent
/// 1/2-geometric variables: `Pr[|M - E M| >= lambda] < 3.31 exp(-lambda/2)`.
pub fn half_geom_subexp_tail(lambda: f64) -> f64 {
    3.31 * (-lambda / 2.0).exp()
}

/// Sharper one-shot range bounds: `Pr[M >= 2 log2 N]` and
/// `Pr[M <= log2 N - log2 ln N]` are each below `1/N`.
pub fn max_geom_range_tails(n_vars: u64) -> Result<(f64, f64), BoundError> {
    if n_vars < 50 {
        return Err(BoundError::TooFewVariables(n_vars));
    }
    let p = 1.0 / n_vars as f64;
    Ok((p, p))
}

/// Chernoff tail for a sum of K maxima of 1/2-geometrics:
/// `Pr[|S - E S| >= t] <= 2 exp(K - t/4)`.
pub fn sum_maxima_tail(k: u32, t: f64) -> f64 {
    2.0 * (k as f64 - t / 4.0).exp()
}

/// Tail of the averaged estimate: for `K >= 4 log2 N`,
/// `Pr[|S/K - log2 N| >= 4.7] <= 2/N`. The error names the K actually
/// required at this N.
pub fn average_estimate_tail(n_vars: u64, k: u32) -> Result<f64, BoundError> {
    if n_vars < 50 {
        return Err(BoundError::TooFewVariables(n_vars));
    }
    let required = (4.0 * (n_vars as f64).log2()).ceil() as u32;
    if k < required {
        return Err(BoundError::KTooSmall { required, got: k });
    }
    Ok(2.0 / n_vars as f64)
}

/// Epidemic completion-time tail over the whole population:
/// `Pr[T > alpha_u ln n] < 4 n^(-alpha_u/4 + 1)`.
pub fn epidemic_tail(n: u64, alpha_u: f64) -> f64 {
    4.0 * (n as f64).powf(-alpha_u / 4.0 + 1.0)
}

/// Expected epidemic completion time: `(n-1)/n * H_{n-1}`.
pub fn epidemic_expected_time(n: u64) -> Result<f64, BoundError> {
    if n < 2 {
        return Err(BoundError::HarmonicZero);
    }
    Ok((n as f64 - 1.0) / n as f64 * harmonic(n - 1)?)
}

/// Tail for an epidemic confined to a subpopulation of `a = n/c` agents:
/// `Pr[T > alpha_u ln a] < a^(-(alpha_u - 4c)^2 / (12 c))`.
pub fn partial_epidemic_tail(a: u64, c: f64, alpha_u: f64) -> Result<f64, BoundError> {
    if c < 1.0 {
        return Err(BoundError::BadSubpopulationRatio(c));
    }
    let exponent = -(alpha_u - 4.0 * c).powi(2) / (12.0 * c);
    Ok((a as f64).powf(exponent))
}

/// Per-agent interaction-count coefficient: in `C ln n` time each agent has
/// at most `D ln n = (2C + sqrt(12 C)) ln n` interactions except with
/// probability `1/n`. Returns `(D, 1/n)`.
pub fn interaction_count_bound(c: f64, n: u64) -> Result<(f64, f64), BoundError> {
    if c < 3.0 {
        return Err(BoundError::CTooSmall(c));
    }
    let d = 2.0 * c + (12.0 * c).sqrt();
    Ok((d, 1.0 / n as f64))
}

/// Partition-balance tail: the count of A agents leaves
/// `[n/2 - a, n/2 + a]` on a given side with probability at most
/// `exp(-2 a^2 / n)`.
pub fn partition_tail(n: u64, a: f64) -> f64 {
    (-2.0 * a * a / n as f64).exp()
}

/// Balls-into-bins decay: with k of n bins initially empty and m balls
/// thrown, `Pr[<= delta k bins remain empty] < (2 delta e^(m/n))^(delta k)`.
pub fn balls_bins_decay_bound(k: u64, delta: f64, m: u64, n: u64) -> Result<f64, BoundError> {
    check_delta(delta)?;
    let base = 2.0 * delta * (m as f64 / n as f64).exp();
    Ok(base.powf(delta * k as f64))
}

/// Count-decay bound: a state with initial count k keeps count above
/// `delta k` throughout `[0, T]` except with probability
/// `(2 delta e^(3T))^(delta k)`; at `delta = 1/81`, `T = 1` this is below
/// `2^(-k/81)`.
pub fn count_decay_bound(k: u64, delta: f64, t: f64) -> Result<f64, BoundError> {
    check_delta(delta)?;
    let base = 2.0 * delta * (3.0 * t).exp();
    Ok(base.powf(delta * k as f64))
}

fn check_delta(delta: f64) -> Result<(), BoundError> {
    if delta <= 0.0 || delta > 0.5 {
        return Err(BoundError::BadDelta(delta));
    }
    Ok(())
}
