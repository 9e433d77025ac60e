//! The uniform leaderless log-size estimation protocol.
//!
//! Agents partition into a computing role `A` and a partner role (`S`
//! storage agents in the randomized variant, `F` coin-flip agents in the
//! synthetic-coin variant), agree on a geometric draw `clk` whose population
//! maximum is a constant-factor estimate of log2 n, and then run
//! `epoch_multiplier * clk` epochs of a leaderless phase clock. In each
//! epoch the `A` agents generate one fresh geometric variable, spread its
//! maximum by epidemic, and bank it into a running sum; the final output is
//! `sum / epoch + 1`, an additive-constant estimate of log2 n. Whenever an
//! agent learns a larger `clk` it restarts all downstream state.

use crate::primitives::{restart, GeometricDraws};
use crate::rng::Rng;
use crate::sim::{self, Population, RunOptions, SimError, Trace};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EstimateError {
    #[error("output is undefined before any epoch has completed")]
    ZeroEpochs,
}

/// Agent roles. `X` is the unpartitioned initial role and never reappears
/// once left. `S` exists only in the randomized variant, `F` only in the
/// synthetic-coin variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    X,
    A,
    S,
    F,
}

/// Protocol variant selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Randomized A/S split: `A` agents draw geometrics from the run's RNG,
    /// `S` agents store the running sum.
    As,
    /// Synthetic-coin A/F split: `A` agents derive their coin flips from
    /// receiver/sender roles in interactions with `F` agents and keep their
    /// own sums.
    Af,
}

/// The constants the protocol leaves symbolic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    pub variant: Variant,
    /// Epoch-length coefficient: an epoch lasts `cte * clk` of an agent's
    /// own interactions.
    pub cte: u32,
    /// Number of epochs to run, as a multiple of `clk` (the protocol's 5).
    pub epoch_multiplier: u32,
    /// Additive adjustment applied when a `clk` draw completes (the
    /// protocol's +2).
    pub clk_offset: u32,
}

impl ProtocolParams {
    /// Profile with the constants sized for the analysis to apply
    /// (`cte (log n - log ln n) >= 94 log n` needs cte = 140 for the
    /// randomized variant at n >= 1000; the synthetic-coin analysis needs
    /// 139 log n, hence 200).
    pub fn faithful(variant: Variant) -> Self {
        ProtocolParams {
            variant,
            cte: match variant {
                Variant::As => 140,
                Variant::Af => 200,
            },
            epoch_multiplier: 5,
            clk_offset: 2,
        }
    }

    /// Short-epoch profile for exploratory runs. Convergence is much faster
    /// but the high-probability guarantees are weakened.
    pub fn fast(variant: Variant) -> Self {
        ProtocolParams {
            variant,
            cte: 16,
            epoch_multiplier: 5,
            clk_offset: 2,
        }
    }

    #[inline]
    fn timer_threshold(&self, clk: u32) -> u32 {
        self.cte * clk
    }

    #[inline]
    fn epoch_target(&self, clk: u32) -> u32 {
        self.epoch_multiplier * clk
    }
}

/// The final estimate, kept exact: the reported value is
/// `sum / epochs + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutputRatio {
    pub sum: u32,
    pub epochs: u32,
}

impl OutputRatio {
    pub fn value(&self) -> f64 {
        self.sum as f64 / self.epochs as f64 + 1.0
    }

    /// Nearest-integer rendering of the estimate.
    pub fn rounded(&self) -> i64 {
        self.value().round() as i64
    }
}

/// `sum / epochs + 1` as a real value.
pub fn compute_output(sum: u64, epochs: u64) -> Result<f64, EstimateError> {
    if epochs == 0 {
        return Err(EstimateError::ZeroEpochs);
    }
    Ok(sum as f64 / epochs as f64 + 1.0)
}

/// One agent's full memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AgentState {
    pub role: Role,
    pub clk: u32,
    pub gr: u32,
    pub time: u32,
    pub epoch: u32,
    pub sum: u32,
    /// A/S only: this agent has deposited (or skipped) its current epoch.
    pub updated_sum: bool,
    /// A/F only: the synthetic-coin `clk` draw has completed.
    pub clk_generated: bool,
    /// A/F only: the current epoch's `gr` draw has completed.
    pub gr_generated: bool,
    pub protocol_done: bool,
    pub output: Option<OutputRatio>,
}

impl AgentState {
    /// The initial state every agent starts in.
    pub fn initial() -> Self {
        AgentState {
            role: Role::X,
            clk: 1,
            gr: 1,
            time: 0,
            epoch: 0,
            sum: 0,
            updated_sum: false,
            clk_generated: false,
            gr_generated: false,
            protocol_done: false,
            output: None,
        }
    }
}

/// Spec name for [`AgentState::initial`].
pub fn init_agent() -> AgentState {
    AgentState::initial()
}

/// Per-interaction side effects worth counting.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepEffects {
    pub restarts: u8,
}

#[inline]
fn assign_clk_draw<R: GeometricDraws>(agent: &mut AgentState, rng: &mut R, params: &ProtocolParams) {
    // An unpartitioned agent may already have adopted a propagated clk;
    // keeping the max preserves per-agent clk monotonicity.
    let draw = rng.geometric_half() + params.clk_offset;
    agent.clk = agent.clk.max(draw);
}

/// Role partitioning for the randomized variant: X,X -> (sender A with a
/// fresh clk draw, receiver S); a lone X becomes the role complementary to
/// a non-X sender. Pairs without an X receiver (or X,X) are untouched.
pub fn partition_roles<R: GeometricDraws>(
    receiver: &mut AgentState,
    sender: &mut AgentState,
    rng: &mut R,
    params: &ProtocolParams,
) {
    match (sender.role, receiver.role) {
        (Role::X, Role::X) => {
            sender.role = Role::A;
            assign_clk_draw(sender, rng, params);
            receiver.role = Role::S;
        }
        (Role::A, Role::X) => {
            receiver.role = Role::S;
        }
        (Role::S, Role::X) => {
            receiver.role = Role::A;
            assign_clk_draw(receiver, rng, params);
        }
        _ => {}
    }
}

fn partition_af(receiver: &mut AgentState, sender: &mut AgentState) {
    match (sender.role, receiver.role) {
        (Role::X, Role::X) => {
            sender.role = Role::A;
            receiver.role = Role::F;
        }
        (Role::A, Role::X) => {
            receiver.role = Role::F;
        }
        (Role::F, Role::X) => {
            receiver.role = Role::A;
        }
        _ => {}
    }
}

#[inline]
fn move_to_next_grv<R: GeometricDraws>(agent: &mut AgentState, rng: &mut R) {
    agent.time = 0;
    agent.gr = rng.geometric_half();
    agent.updated_sum = false;
}

/// The leaderless phase-clock tick for an A agent in the randomized
/// variant. The timer fires once the count has reached `cte * clk` and the
/// epoch's deposit has been acknowledged; the count is capped at twice the
/// threshold while waiting. Reaching `epoch_multiplier * clk` epochs
/// latches `protocol_done`.
#[inline]
fn tick_timer_as<R: GeometricDraws>(agent: &mut AgentState, rng: &mut R, params: &ProtocolParams) {
    let threshold = params.timer_threshold(agent.clk);
    if agent.time < threshold.saturating_mul(2) {
        agent.time += 1;
    }
    if agent.time >= threshold && agent.updated_sum && !agent.protocol_done {
        agent.epoch += 1;
        move_to_next_grv(agent, rng);
    }
    if agent.epoch >= params.epoch_target(agent.clk) {
        agent.protocol_done = true;
    }
}

#[inline]
fn propagate_max_clk<R: GeometricDraws>(
    a1: &mut AgentState,
    a2: &mut AgentState,
    rng: &mut R,
    params: &ProtocolParams,
    fx: &mut StepEffects,
) {
    if a1.clk < a2.clk {
        a1.clk = a2.clk;
        restart(a1, rng, params);
        fx.restarts += 1;
    } else if a2.clk < a1.clk {
        a2.clk = a1.clk;
        restart(a2, rng, params);
        fx.restarts += 1;
    }
}

#[inline]
fn propagate_epoch_as<R: GeometricDraws>(a1: &mut AgentState, a2: &mut AgentState, rng: &mut R) {
    if a1.role == Role::A && a2.role == Role::A {
        if a1.epoch < a2.epoch {
            a1.epoch = a2.epoch;
            move_to_next_grv(a1, rng);
        } else if a2.epoch < a1.epoch {
            a2.epoch = a1.epoch;
            move_to_next_grv(a2, rng);
        }
    } else if a1.role == Role::S && a2.role == Role::S {
        if a1.epoch < a2.epoch {
            a1.epoch = a2.epoch;
            a1.sum = a2.sum;
        } else if a2.epoch < a1.epoch {
            a2.epoch = a1.epoch;
            a2.sum = a1.sum;
        }
    }
}

/// Deposit step between an A agent whose timer has run out and an S agent
/// in the same epoch: the S agent banks the A agent's current (maximal)
/// `gr` and advances its epoch. Meeting an S agent already in a later epoch
/// acknowledges the deposit without banking.
#[inline]
fn update_sum(a: &mut AgentState, s: &mut AgentState, params: &ProtocolParams) {
    if a.epoch == s.epoch && a.time >= params.timer_threshold(a.clk) && !a.protocol_done {
        s.epoch += 1;
        s.sum += a.gr;
        a.updated_sum = true;
    } else if a.epoch < s.epoch {
        a.updated_sum = true;
    }
}

#[inline]
fn propagate_max_gr(a1: &mut AgentState, a2: &mut AgentState) {
    if a1.epoch == a2.epoch {
        if a1.gr < a2.gr {
            a1.gr = a2.gr;
        } else if a2.gr < a1.gr {
            a2.gr = a1.gr;
        }
    }
}

/// An S agent that has completed all its epochs computes the estimate from
/// its own sum and latches done.
#[inline]
fn finish_s(agent: &mut AgentState, params: &ProtocolParams) {
    if agent.role == Role::S
        && !agent.protocol_done
        && agent.epoch >= params.epoch_target(agent.clk)
    {
        agent.output = Some(OutputRatio {
            sum: agent.sum,
            epochs: agent.epoch,
        });
        agent.protocol_done = true;
    }
}

/// Output spreads by epidemic: an agent that has not locked in a result
/// adopts the value held by a finished partner.
#[inline]
fn share_output(a1: &mut AgentState, a2: &mut AgentState) {
    #[inline]
    fn adopt(dst: &mut AgentState, src: &AgentState) {
        if src.protocol_done {
            if let Some(out) = src.output {
                if dst.output.is_none() || !dst.protocol_done {
                    dst.output = Some(out);
                    dst.protocol_done = true;
                }
            }
        }
    }
    if a2.protocol_done && a2.output.is_some() {
        adopt(a1, &a2.clone());
    }
    if a1.protocol_done && a1.output.is_some() {
        adopt(a2, &a1.clone());
    }
}

/// One interaction of the randomized A/S variant, applied to the
/// (receiver, sender) states in the protocol's order: partition, per-A
/// timer tick, clk max-propagation (with restart on adoption), epoch
/// propagation, A-S deposit, A-A gr max-propagation, output spread.
pub fn interact_as<R: GeometricDraws>(
    receiver: &mut AgentState,
    sender: &mut AgentState,
    rng: &mut R,
    params: &ProtocolParams,
) -> StepEffects {
    let mut fx = StepEffects::default();
    partition_roles(receiver, sender, rng, params);
    if receiver.role == Role::A {
        tick_timer_as(receiver, rng, params);
    }
    if sender.role == Role::A {
        tick_timer_as(sender, rng, params);
    }
    propagate_max_clk(receiver, sender, rng, params, &mut fx);
    propagate_epoch_as(receiver, sender, rng);
    match (receiver.role, sender.role) {
        (Role::A, Role::S) => update_sum(receiver, sender, params),
        (Role::S, Role::A) => update_sum(sender, receiver, params),
        _ => {}
    }
    if receiver.role == Role::A && sender.role == Role::A {
        propagate_max_gr(receiver, sender);
    }
    finish_s(receiver, params);
    finish_s(sender, params);
    share_output(receiver, sender);
    fx
}

/// Synthetic-coin timer tick: fires on the bare threshold (there is no
/// deposit acknowledgement in this variant) and banks the current `gr` into
/// the agent's own sum. Completing the final epoch computes the output in
/// place.
#[inline]
fn tick_timer_af(agent: &mut AgentState, params: &ProtocolParams) {
    let threshold = params.timer_threshold(agent.clk);
    if agent.time < threshold.saturating_mul(2) {
        agent.time += 1;
    }
    if agent.time >= threshold && !agent.protocol_done {
        agent.epoch += 1;
        bank_sum_af(agent);
    }
    if agent.epoch >= params.epoch_target(agent.clk) && !agent.protocol_done {
        agent.protocol_done = true;
        agent.output = Some(OutputRatio {
            sum: agent.sum,
            epochs: agent.epoch,
        });
    }
}

#[inline]
fn bank_sum_af(agent: &mut AgentState) {
    agent.sum += agent.gr;
    agent.time = 0;
    agent.gr = 1;
    agent.gr_generated = false;
}

#[inline]
fn propagate_epoch_af(a1: &mut AgentState, a2: &mut AgentState) {
    if a1.epoch < a2.epoch {
        a1.epoch = a2.epoch;
        bank_sum_af(a1);
    } else if a2.epoch < a1.epoch {
        a2.epoch = a1.epoch;
        bank_sum_af(a2);
    }
}

/// Max-propagation of completed `gr` draws. The generated flags must be
/// re-checked here: an epoch adoption in the same interaction banks the
/// adopter and reopens its draw, and merging a maximum into an open draw
/// would let later coin flips count up from it.
#[inline]
fn propagate_max_gr_af(a1: &mut AgentState, a2: &mut AgentState) {
    if a1.gr_generated && a2.gr_generated {
        propagate_max_gr(a1, a2);
    }
}

/// One interaction of the synthetic-coin A/F variant. All randomness comes
/// from the scheduler: an A agent interacting with an F agent reads one
/// fair bit from whether it is the receiver, which drives the incremental
/// generation of `clk` first and then of each epoch's `gr`. Epidemics for
/// clk, epoch and gr run only between A agents whose relevant draws have
/// completed.
pub fn interact_af(receiver: &mut AgentState, sender: &mut AgentState, params: &ProtocolParams) -> StepEffects {
    let mut fx = StepEffects::default();
    // Coin flips only count for pairs that were already partitioned into
    // A-F before this interaction. In an interaction that converts an X the
    // computing agent is always the sender, so counting it as a flip would
    // insert a deterministic tail and skew every draw upward.
    let a_f_pair = matches!(
        (receiver.role, sender.role),
        (Role::A, Role::F) | (Role::F, Role::A)
    );
    partition_af(receiver, sender);
    if receiver.role == Role::A {
        tick_timer_af(receiver, params);
    }
    if sender.role == Role::A {
        tick_timer_af(sender, params);
    }
    if a_f_pair {
        let a_is_receiver = receiver.role == Role::A;
        let a = if a_is_receiver { &mut *receiver } else { &mut *sender };
        if !a.clk_generated {
            // Generate-Clock: tails (sender) extend the draw, the head
            // (receiver) completes it with the +offset adjustment.
            if a_is_receiver {
                a.clk += params.clk_offset;
                a.clk_generated = true;
            } else {
                a.clk += 1;
            }
        } else if !a.gr_generated {
            if a_is_receiver {
                a.gr_generated = true;
            } else {
                a.gr += 1;
            }
        }
    }
    if receiver.role == Role::A
        && sender.role == Role::A
        && receiver.clk_generated
        && sender.clk_generated
    {
        // Only completed clk draws are comparable.
        let mut scratch = NoDraws;
        propagate_max_clk(receiver, sender, &mut scratch, params, &mut fx);
        if receiver.gr_generated && sender.gr_generated {
            propagate_epoch_af(receiver, sender);
            propagate_max_gr_af(receiver, sender);
        }
    }
    fx
}

/// Draw source for contexts that must not draw (the synthetic-coin variant
/// takes all randomness from the scheduler).
struct NoDraws;

impl GeometricDraws for NoDraws {
    fn geometric_half(&mut self) -> u32 {
        unreachable!("synthetic-coin transition must not draw from an RNG")
    }
}

/// Variant-dispatching transition.
pub fn interact<R: GeometricDraws>(
    receiver: &mut AgentState,
    sender: &mut AgentState,
    rng: &mut R,
    params: &ProtocolParams,
) -> StepEffects {
    match params.variant {
        Variant::As => interact_as(receiver, sender, rng, params),
        Variant::Af => interact_af(receiver, sender, params),
    }
}

/// Stable convergence detector. In the A/S variant: partitioning is
/// complete, every agent is done, holds an output, agrees on that output,
/// and carries the population-maximum `clk`. In the A/F variant the same
/// conditions are required of the A agents (F agents never compute).
/// The conjunction is stable: equal maximal clks rule out further
/// restarts, and done agents never recompute their output.
pub fn is_converged(pop: &Population<AgentState>, params: &ProtocolParams) -> bool {
    let mut reference: Option<(u32, OutputRatio)> = None;
    for agent in pop.agents() {
        match (params.variant, agent.role) {
            (_, Role::X) => return false,
            (Variant::Af, Role::F) => continue,
            _ => {}
        }
        if !agent.protocol_done {
            return false;
        }
        let out = match agent.output {
            Some(out) => out,
            None => return false,
        };
        match reference {
            None => reference = Some((agent.clk, out)),
            Some((clk, first)) => {
                if agent.clk != clk || out != first {
                    return false;
                }
            }
        }
    }
    reference.is_some()
}

/// Observed maxima of the per-field ranges, accounted against the role that
/// stores each field (`gr`/`time` live in A agents; `sum` lives in S agents
/// in the A/S variant and in A agents in the A/F variant).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FieldRanges {
    pub clk_max: u32,
    pub gr_max: u32,
    pub time_max: u32,
    pub epoch_max: u32,
    pub sum_max: u32,
}

impl FieldRanges {
    #[inline]
    pub fn observe(&mut self, agent: &AgentState, variant: Variant) {
        self.clk_max = self.clk_max.max(agent.clk);
        self.epoch_max = self.epoch_max.max(agent.epoch);
        match agent.role {
            Role::A => {
                self.gr_max = self.gr_max.max(agent.gr);
                self.time_max = self.time_max.max(agent.time);
                if variant == Variant::Af {
                    self.sum_max = self.sum_max.max(agent.sum);
                }
            }
            Role::S => {
                self.sum_max = self.sum_max.max(agent.sum);
            }
            _ => {}
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RoleCounts {
    pub a: usize,
    pub s: usize,
    pub f: usize,
    pub x: usize,
}

pub fn role_counts(pop: &Population<AgentState>) -> RoleCounts {
    let mut counts = RoleCounts::default();
    for agent in pop.agents() {
        match agent.role {
            Role::A => counts.a += 1,
            Role::S => counts.s += 1,
            Role::F => counts.f += 1,
            Role::X => counts.x += 1,
        }
    }
    counts
}

/// Per-trial outcome.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub converged: bool,
    /// Parallel time at which the convergence predicate first held (at the
    /// snapshot cadence); absent when the budget ran out first.
    pub convergence_parallel_time: Option<f64>,
    pub outputs: Vec<Option<OutputRatio>>,
    /// Max over agents with a set output of |output - log2 n|.
    pub error: Option<f64>,
    pub restart_count: u64,
    pub field_ranges: FieldRanges,
    pub role_counts: RoleCounts,
    pub interactions: u64,
    pub parallel_time: f64,
}

impl RunResult {
    /// The single output value all agents share, when they do.
    pub fn common_output(&self) -> Option<OutputRatio> {
        let mut iter = self.outputs.iter().flatten();
        let first = *iter.next()?;
        if self.outputs.iter().flatten().all(|o| *o == first) {
            Some(first)
        } else {
            None
        }
    }
}

/// Population-level metrics sampled once per snapshot cadence.
#[derive(Debug, Clone, Copy, Default)]
pub struct PopSnapshot {
    pub clk_min: u32,
    pub clk_max: u32,
    pub gr_max: u32,
    pub time_max: u32,
    pub epoch_min: u32,
    pub epoch_max: u32,
    pub sum_max: u32,
    pub done_count: usize,
    pub output_count: usize,
}

fn snapshot(pop: &Population<AgentState>) -> PopSnapshot {
    let mut s = PopSnapshot {
        clk_min: u32::MAX,
        epoch_min: u32::MAX,
        ..PopSnapshot::default()
    };
    for a in pop.agents() {
        s.clk_min = s.clk_min.min(a.clk);
        s.clk_max = s.clk_max.max(a.clk);
        s.gr_max = s.gr_max.max(a.gr);
        s.time_max = s.time_max.max(a.time);
        s.epoch_min = s.epoch_min.min(a.epoch);
        s.epoch_max = s.epoch_max.max(a.epoch);
        s.sum_max = s.sum_max.max(a.sum);
        s.done_count += a.protocol_done as usize;
        s.output_count += a.output.is_some() as usize;
    }
    s
}

/// Default interaction budget: `1e4 * n * ceil(log2 n)^2`, a generous
/// multiple of the O(log^2 n) expected convergence time.
pub fn default_budget(n: usize) -> u64 {
    let log = (n as f64).log2().ceil() as u64;
    10_000u64 * n as u64 * log * log
}

#[derive(Debug, Clone)]
pub struct TrialConfig {
    pub n: usize,
    pub seed: u64,
    pub params: ProtocolParams,
    /// Interaction budget; `None` uses [`default_budget`].
    pub max_interactions: Option<u64>,
    /// Snapshot cadence in interactions; `None` means once per parallel
    /// time unit (every `n` interactions).
    pub snapshot_every: Option<u64>,
}

impl TrialConfig {
    pub fn new(n: usize, seed: u64, params: ProtocolParams) -> Self {
        TrialConfig {
            n,
            seed,
            params,
            max_interactions: None,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub result: RunResult,
    pub trace: Trace<PopSnapshot>,
}

/// Runs one seeded trial of the protocol to convergence or budget
/// exhaustion. Rerunning with the same config is bit-identical.
pub fn run_trial(cfg: &TrialConfig) -> Result<TrialOutput, SimError> {
    let mut pop = Population::from_fn(cfg.n, |_| AgentState::initial())?;
    let mut rng = Rng::seeded(cfg.seed);
    let params = cfg.params;
    let opts = RunOptions {
        max_interactions: cfg.max_interactions.unwrap_or_else(|| default_budget(cfg.n)),
        snapshot_every: cfg.snapshot_every.unwrap_or(cfg.n as u64),
    };
    let mut trace = Trace::new(false);
    let mut ranges = FieldRanges::default();
    let mut restarts = 0u64;
    let outcome = sim::run(
        &mut pop,
        &mut rng,
        |receiver, sender, rng, _| {
            let fx = interact(receiver, sender, rng, &params);
            restarts += fx.restarts as u64;
            ranges.observe(receiver, params.variant);
            ranges.observe(sender, params.variant);
        },
        |pop| is_converged(pop, &params),
        snapshot,
        &mut trace,
        &opts,
    )?;

    let log2n = (cfg.n as f64).log2();
    let outputs: Vec<Option<OutputRatio>> = pop.agents().iter().map(|a| a.output).collect();
    let error = outputs
        .iter()
        .flatten()
        .map(|o| (o.value() - log2n).abs())
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
    let result = RunResult {
        converged: outcome.stopped,
        convergence_parallel_time: outcome.stopped.then_some(outcome.parallel_time),
        outputs,
        error,
        restart_count: restarts,
        field_ranges: ranges,
        role_counts: role_counts(&pop),
        interactions: outcome.interactions,
        parallel_time: outcome.parallel_time,
    };
    Ok(TrialOutput { result, trace })
}

/// Comparison of a finished run against the likely state ranges of the
/// analysis. The `time` field is compared against the structural cap of
/// twice the timer threshold.
#[derive(Debug, Clone, Copy)]
pub struct MeasureReport {
    pub error: Option<f64>,
    pub convergence_parallel_time: Option<f64>,
    pub restart_count: u64,
    pub clk_limit: f64,
    pub clk_ok: bool,
    pub gr_limit: f64,
    pub gr_ok: bool,
    pub epoch_limit: f64,
    pub epoch_ok: bool,
    pub sum_limit: f64,
    pub sum_ok: bool,
    pub time_cap: u64,
    pub time_ok: bool,
}

/// Checks a run's observed field maxima against the analysis ranges
/// (`clk <= 2 log n + 1`, `gr <= 2 log n`, `epoch <= 11 log n`,
/// `sum <= 22 log^2 n`, `time <= 2 cte clk`).
pub fn measure_run(result: &RunResult, n: usize, params: &ProtocolParams) -> MeasureReport {
    let log2n = (n as f64).log2();
    let r = &result.field_ranges;
    let clk_limit = 2.0 * log2n + 1.0;
    let gr_limit = 2.0 * log2n;
    let epoch_limit = 11.0 * log2n;
    let sum_limit = 22.0 * log2n * log2n;
    let time_cap = 2 * params.cte as u64 * r.clk_max as u64;
    MeasureReport {
        error: result.error,
        convergence_parallel_time: result.convergence_parallel_time,
        restart_count: result.restart_count,
        clk_limit,
        clk_ok: (r.clk_max as f64) <= clk_limit,
        gr_limit,
        gr_ok: (r.gr_max as f64) <= gr_limit,
        epoch_limit,
        epoch_ok: (r.epoch_max as f64) <= epoch_limit,
        sum_limit,
        sum_ok: (r.sum_max as f64) <= sum_limit,
        time_cap,
        time_ok: (r.time_max as u64) <= time_cap,
    }
}
