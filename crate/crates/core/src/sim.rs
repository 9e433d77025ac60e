//! Sequential-interaction simulation engine.
//!
//! A run draws uniformly random ordered agent pairs (receiver, sender),
//! applies a transition to the pair, and keeps interaction/parallel-time
//! accounting. Runs are strictly sequential; distinct runs own their `Rng`
//! and `Population` and may execute on different threads.

use crate::rng::Rng;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("population must have at least 2 agents, got {0}")]
    InvalidPopulation(usize),
    #[error("max_interactions must be positive")]
    EmptyBudget,
}

/// The multiset of agent states, indexed so the scheduler can address them.
#[derive(Debug, Clone)]
pub struct Population<S> {
    agents: Vec<S>,
    interactions: u64,
}

impl<S> Population<S> {
    pub fn new(agents: Vec<S>) -> Result<Self, SimError> {
        if agents.len() < 2 {
            return Err(SimError::InvalidPopulation(agents.len()));
        }
        Ok(Population {
            agents,
            interactions: 0,
        })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> S) -> Result<Self, SimError> {
        Self::new((0..n).map(f).collect())
    }

    pub fn n(&self) -> usize {
        self.agents.len()
    }

    /// Interactions executed so far. Only ever increases.
    pub fn interactions(&self) -> u64 {
        self.interactions
    }

    /// Elapsed parallel time, `interactions / n`.
    pub fn parallel_time(&self) -> f64 {
        parallel_time(self.interactions, self.n())
    }

    pub fn agents(&self) -> &[S] {
        &self.agents
    }

    pub fn agents_mut(&mut self) -> &mut [S] {
        &mut self.agents
    }

    /// Disjoint mutable access to two agents.
    #[inline]
    pub fn pair_mut(&mut self, i: usize, j: usize) -> (&mut S, &mut S) {
        debug_assert!(i != j);
        if i < j {
            let (lo, hi) = self.agents.split_at_mut(j);
            (&mut lo[i], &mut hi[0])
        } else {
            let (lo, hi) = self.agents.split_at_mut(i);
            (&mut hi[0], &mut lo[j])
        }
    }
}

/// One scheduled ordered pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InteractionRecord {
    pub receiver: usize,
    pub sender: usize,
    pub interaction_number: u64,
}

/// Draws an ordered pair uniformly from the n(n-1) possibilities.
#[inline]
pub fn pick_pair(rng: &mut Rng, n: usize, interaction_number: u64) -> Result<InteractionRecord, SimError> {
    if n < 2 {
        return Err(SimError::InvalidPopulation(n));
    }
    let receiver = rng.next_index(n);
    let mut sender = rng.next_index(n - 1);
    if sender >= receiver {
        sender += 1;
    }
    Ok(InteractionRecord {
        receiver,
        sender,
        interaction_number,
    })
}

/// Parallel time after `interactions` interactions among `n` agents.
#[inline]
pub fn parallel_time(interactions: u64, n: usize) -> f64 {
    interactions as f64 / n as f64
}

/// Metric snapshots sampled at a fixed interaction cadence, plus an optional
/// full interaction log. Snapshot times are strictly increasing.
#[derive(Debug, Clone)]
pub struct Trace<M> {
    snapshots: Vec<(f64, M)>,
    log: Option<Vec<InteractionRecord>>,
}

impl<M> Trace<M> {
    pub fn new(log_interactions: bool) -> Self {
        Trace {
            snapshots: Vec::new(),
            log: if log_interactions { Some(Vec::new()) } else { None },
        }
    }

    pub fn push_snapshot(&mut self, parallel_time: f64, metrics: M) {
        if let Some((last, _)) = self.snapshots.last() {
            assert!(parallel_time > *last, "snapshot times must increase");
        }
        self.snapshots.push((parallel_time, metrics));
    }

    pub fn snapshots(&self) -> &[(f64, M)] {
        &self.snapshots
    }

    pub fn log(&self) -> Option<&[InteractionRecord]> {
        self.log.as_deref()
    }

    fn push_log(&mut self, rec: InteractionRecord) {
        if let Some(log) = &mut self.log {
            log.push(rec);
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    /// Hard interaction budget; the run reports non-stopped when exhausted.
    pub max_interactions: u64,
    /// Snapshot (and stop-predicate) cadence in interactions. The default
    /// used by callers is `n`, i.e. once per unit of parallel time.
    pub snapshot_every: u64,
}

/// What happened to a run: whether the stop predicate fired, and where.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOutcome {
    pub stopped: bool,
    pub interactions: u64,
    pub parallel_time: f64,
}

/// Drives a run: repeatedly draws an ordered pair and applies `step` to the
/// (receiver, sender) states. At every `snapshot_every` interactions
/// (including interaction 0) it records a snapshot and evaluates `stop`;
/// the run halts when `stop` holds or the budget is exhausted. Budget
/// exhaustion is not an error: the outcome reports `stopped: false`.
pub fn run<S, M>(
    pop: &mut Population<S>,
    rng: &mut Rng,
    mut step: impl FnMut(&mut S, &mut S, &mut Rng, &InteractionRecord),
    mut stop: impl FnMut(&Population<S>) -> bool,
    mut snapshot: impl FnMut(&Population<S>) -> M,
    trace: &mut Trace<M>,
    opts: &RunOptions,
) -> Result<RunOutcome, SimError> {
    if opts.max_interactions == 0 {
        return Err(SimError::EmptyBudget);
    }
    let n = pop.n();
    let cadence = opts.snapshot_every.max(1);
    let mut until_check = 0u64;
    loop {
        if until_check == 0 {
            until_check = cadence;
            let t = pop.parallel_time();
            trace.push_snapshot(t, snapshot(pop));
            if stop(pop) {
                return Ok(RunOutcome {
                    stopped: true,
                    interactions: pop.interactions,
                    parallel_time: t,
                });
            }
        }
        if pop.interactions >= opts.max_interactions {
            return Ok(RunOutcome {
                stopped: false,
                interactions: pop.interactions,
                parallel_time: pop.parallel_time(),
            });
        }
        let rec = pick_pair(rng, n, pop.interactions)?;
        let (receiver, sender) = pop.pair_mut(rec.receiver, rec.sender);
        step(receiver, sender, rng, &rec);
        pop.interactions += 1;
        until_check -= 1;
        trace.push_log(rec);
    }
}
