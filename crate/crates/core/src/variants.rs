//! Auxiliary protocols around the size estimator: the probability-1 exact
//! backup that yields a guaranteed upper bound on log2 n, the combined
//! estimator built on it, and the terminating variant driven by an initial
//! leader.

use crate::estimate::{self, AgentState, ProtocolParams};
use crate::rng::Rng;
use crate::sim::{pick_pair, parallel_time, Population, SimError};

/// Backup-protocol agent: a live counter (`L`) carrying weight `2^level`,
/// or a follower (`F`) remembering the highest merge level it has heard of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackupKind {
    L,
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BackupAgentState {
    pub kind: BackupKind,
    pub level: u32,
}

impl BackupAgentState {
    pub fn initial() -> Self {
        BackupAgentState {
            kind: BackupKind::L,
            level: 0,
        }
    }
}

/// Backup transition: two live agents at the same level merge
/// (`L_i, L_i -> L_{i+1}, F_{i+1}`, receiver staying live); two followers
/// propagate the maximum level. Everything else is untouched.
pub fn backup_interact(
    x: BackupAgentState,
    y: BackupAgentState,
) -> (BackupAgentState, BackupAgentState) {
    use BackupKind::*;
    match (x.kind, y.kind) {
        (L, L) if x.level == y.level => (
            BackupAgentState { kind: L, level: x.level + 1 },
            BackupAgentState { kind: F, level: x.level + 1 },
        ),
        (F, F) => {
            let level = x.level.max(y.level);
            (
                BackupAgentState { kind: F, level },
                BackupAgentState { kind: F, level },
            )
        }
        _ => (x, y),
    }
}

/// The guaranteed upper-bound exponent extracted from a stabilized backup
/// population: the binary representation of n is spread over the surviving
/// live agents, so a single live agent means n is exactly `2^level`, and
/// otherwise the top level must be rounded up once. The result satisfies
/// `2^(k_ex - 1) < n <= 2^k_ex`.
pub fn k_ex_of(pop: &Population<BackupAgentState>) -> u32 {
    let mut live = 0usize;
    let mut max_level = 0u32;
    for a in pop.agents() {
        if a.kind == BackupKind::L {
            live += 1;
            max_level = max_level.max(a.level);
        }
    }
    if live == 1 {
        max_level
    } else {
        max_level + 1
    }
}

/// No merge can ever fire again once all live levels are distinct.
pub fn backup_stabilized(pop: &Population<BackupAgentState>) -> bool {
    let mut seen = 0u128;
    for a in pop.agents() {
        if a.kind == BackupKind::L {
            let bit = 1u128 << (a.level.min(127));
            if seen & bit != 0 {
                return false;
            }
            seen |= bit;
        }
    }
    true
}

#[derive(Debug, Clone, Copy)]
pub struct BackupRunResult {
    pub stabilized: bool,
    pub k_ex: u32,
    pub parallel_time: f64,
    pub live_count: usize,
}

/// Runs the backup protocol until no merge is possible (checked
/// incrementally) or the interaction budget runs out.
pub fn run_backup(n: usize, seed: u64, max_interactions: u64) -> Result<BackupRunResult, SimError> {
    let mut pop = Population::from_fn(n, |_| BackupAgentState::initial())?;
    let mut rng = Rng::seeded(seed);
    // counts[level] = number of live agents at that level; pairs = number
    // of levels with a possible merge.
    let mut counts = vec![0u32; 64];
    counts[0] = n as u32;
    let mut mergeable_levels = 1usize;
    let mut interactions = 0u64;
    while mergeable_levels > 0 && interactions < max_interactions {
        let rec = pick_pair(&mut rng, n, interactions)?;
        interactions += 1;
        let (rx, sx) = pop.pair_mut(rec.receiver, rec.sender);
        let before = (*rx, *sx);
        let (nx, ny) = backup_interact(before.0, before.1);
        *rx = nx;
        *sx = ny;
        if before.0.kind == BackupKind::L
            && before.1.kind == BackupKind::L
            && before.0.level == before.1.level
        {
            let lvl = before.0.level as usize;
            let was_mergeable = counts[lvl] >= 2;
            counts[lvl] -= 2;
            if was_mergeable && counts[lvl] < 2 {
                mergeable_levels -= 1;
            }
            if lvl + 1 >= counts.len() {
                counts.resize(lvl + 2, 0);
            }
            counts[lvl + 1] += 1;
            if counts[lvl + 1] == 2 {
                mergeable_levels += 1;
            }
        }
    }
    let stabilized = mergeable_levels == 0;
    Ok(BackupRunResult {
        stabilized,
        k_ex: k_ex_of(&pop),
        parallel_time: parallel_time(interactions, n),
        live_count: pop
            .agents()
            .iter()
            .filter(|a| a.kind == BackupKind::L)
            .count(),
    })
}

/// Default one-sided shift added to the converging estimate before taking
/// the max with the exact backup.
pub const UPPER_BOUND_SHIFT: f64 = 3.7;

/// Combined guaranteed upper bound: `max(ceil(k_est + shift), k_ex)`.
/// Ceiling so the shift can only err upward.
pub fn combined_upper_bound_with_shift(k_est: f64, k_ex: u32, shift: f64) -> i64 {
    let k = (k_est + shift).ceil() as i64;
    k.max(k_ex as i64)
}

pub fn combined_upper_bound(k_est: f64, k_ex: u32) -> i64 {
    combined_upper_bound_with_shift(k_est, k_ex, UPPER_BOUND_SHIFT)
}

/// Agent state of the leader-terminating variant: the embedded estimator
/// state plus the leader's phase clock and the spreading termination flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeaderAgentState {
    pub estimator: AgentState,
    pub is_leader: bool,
    /// Leader only: interactions counted toward the current phase.
    pub phase_ticks: u32,
    /// Leader only: completed phases.
    pub phase: u32,
    pub terminated: bool,
}

impl LeaderAgentState {
    pub fn initial(is_leader: bool) -> Self {
        LeaderAgentState {
            estimator: AgentState::initial(),
            is_leader,
            phase_ticks: 0,
            phase: 0,
            terminated: false,
        }
    }
}

/// Knobs of the simplified leader phase clock: the leader counts
/// `cte * clk` of its own interactions per phase and terminates after
/// `k2 * epoch_multiplier * clk` phases; both rescale whenever the leader's
/// `clk` changes (a restart of the downstream protocol).
#[derive(Debug, Clone, Copy)]
pub struct LeaderParams {
    pub k2: u32,
}

impl Default for LeaderParams {
    fn default() -> Self {
        LeaderParams { k2: 4 }
    }
}

/// One interaction of the leader-terminating protocol. Runs the embedded
/// estimator transition, advances the leader's phase clock, and spreads the
/// termination flag by epidemic. Returns whether the pairing violated the
/// single-leader contract.
pub fn leader_interact(
    receiver: &mut LeaderAgentState,
    sender: &mut LeaderAgentState,
    rng: &mut Rng,
    params: &ProtocolParams,
    lparams: &LeaderParams,
) -> bool {
    let violation = receiver.is_leader && sender.is_leader;
    let clk_before = (receiver.estimator.clk, sender.estimator.clk);
    estimate::interact(&mut receiver.estimator, &mut sender.estimator, rng, params);
    for (agent, old_clk) in [
        (&mut *receiver, clk_before.0),
        (&mut *sender, clk_before.1),
    ] {
        if !agent.is_leader {
            continue;
        }
        if agent.estimator.clk != old_clk {
            // The downstream protocol restarted; the termination clock is
            // downstream of clk and restarts with it.
            agent.phase_ticks = 0;
            agent.phase = 0;
        }
        if !agent.terminated {
            agent.phase_ticks += 1;
            let clk = agent.estimator.clk;
            if agent.phase_ticks >= params.cte * clk {
                agent.phase_ticks = 0;
                agent.phase += 1;
                if agent.phase >= lparams.k2 * params.epoch_multiplier * clk {
                    agent.terminated = true;
                }
            }
        }
    }
    if receiver.terminated || sender.terminated {
        receiver.terminated = true;
        sender.terminated = true;
    }
    violation
}

#[derive(Debug, Clone, Copy)]
pub struct LeaderRunResult {
    /// Parallel time at which the convergence predicate first held, if it
    /// did before termination/budget.
    pub converged_at: Option<f64>,
    /// Parallel time of the first terminated=true, if reached in budget.
    pub terminated_at: Option<f64>,
    /// The population was converged at the moment the termination signal
    /// appeared.
    pub terminated_after_convergence: bool,
    pub contract_violations: u64,
}

/// Runs the leader variant until the termination signal appears (then
/// spreads instantly by epidemic; the run stops at the first signal) or the
/// budget is exhausted. Convergence of the embedded estimator is tracked at
/// the same once-per-parallel-time-unit cadence as plain runs.
pub fn run_leader(
    n: usize,
    seed: u64,
    params: &ProtocolParams,
    lparams: &LeaderParams,
    max_interactions: u64,
) -> Result<LeaderRunResult, SimError> {
    let mut pop = Population::from_fn(n, |i| LeaderAgentState::initial(i == 0))?;
    let mut rng = Rng::seeded(seed);
    let mut converged_at = None;
    let mut violations = 0u64;
    let mut interactions = 0u64;
    let cadence = n as u64;
    let mut until_check = 0u64;

    let estimator_pop = |pop: &Population<LeaderAgentState>| {
        // Convergence is defined on the embedded estimator states.
        Population::new(pop.agents().iter().map(|a| a.estimator).collect()).expect("n >= 2")
    };

    loop {
        if until_check == 0 {
            until_check = cadence;
            if converged_at.is_none() && estimate::is_converged(&estimator_pop(&pop), params) {
                converged_at = Some(parallel_time(interactions, n));
            }
        }
        if interactions >= max_interactions {
            return Ok(LeaderRunResult {
                converged_at,
                terminated_at: None,
                terminated_after_convergence: false,
                contract_violations: violations,
            });
        }
        let rec = pick_pair(&mut rng, n, interactions)?;
        let (receiver, sender) = pop.pair_mut(rec.receiver, rec.sender);
        if leader_interact(receiver, sender, &mut rng, params, lparams) {
            violations += 1;
        }
        interactions += 1;
        until_check -= 1;
        if pop.agents().iter().any(|a| a.terminated) {
            let t = parallel_time(interactions, n);
            let converged_now = estimate::is_converged(&estimator_pop(&pop), params);
            if converged_at.is_none() && converged_now {
                converged_at = Some(t);
            }
            return Ok(LeaderRunResult {
                converged_at,
                terminated_at: Some(t),
                terminated_after_convergence: converged_now,
                contract_violations: violations,
            });
        }
    }
}
