//! Protocol building blocks: geometric random variables, the synthetic coin,
//! epidemic max-propagation, the leaderless phase clock, and the restart
//! pattern.

use crate::estimate::{AgentState, ProtocolParams, Variant};
use crate::rng::Rng;
use crate::sim::InteractionRecord;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PrimitiveError {
    #[error("success probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("agent {agent} is not part of interaction ({receiver}, {sender})")]
    NotInInteraction {
        agent: usize,
        receiver: usize,
        sender: usize,
    },
}

/// Source of 1/2-geometric draws. The protocol transition is generic over
/// this so tests can script the exact draw values.
pub trait GeometricDraws {
    /// Flip a fair coin until the first head; return the number of flips
    /// including the head (so the result is >= 1 and has mean 2).
    fn geometric_half(&mut self) -> u32;
}

impl GeometricDraws for Rng {
    #[inline]
    fn geometric_half(&mut self) -> u32 {
        let mut flips = 1;
        while !self.next_bit() {
            flips += 1;
        }
        flips
    }
}

/// Draws a p-geometric variable: flips up to and including the first head,
/// so `Pr[G = t] = (1-p)^(t-1) p` and `E[G] = 1/p`. One random draw per
/// flip, mirroring the incremental generation the protocols use.
pub fn sample_geometric(rng: &mut Rng, p: f64) -> Result<u32, PrimitiveError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(PrimitiveError::InvalidProbability(p));
    }
    let mut flips = 1;
    while rng.next_f64() >= p {
        flips += 1;
    }
    Ok(flips)
}

/// The synthetic coin: under uniform ordered-pair scheduling, whether an
/// agent came up as the receiver of an interaction is a fair bit,
/// independent across interactions.
pub fn synthetic_coin_bit(record: &InteractionRecord, agent: usize) -> Result<bool, PrimitiveError> {
    if agent == record.receiver {
        Ok(true)
    } else if agent == record.sender {
        Ok(false)
    } else {
        Err(PrimitiveError::NotInInteraction {
            agent,
            receiver: record.receiver,
            sender: record.sender,
        })
    }
}

/// Epidemic transition `i,j -> j,j` for `i <= j`: both sides leave with the
/// maximum.
#[inline]
pub fn epidemic_max<T: Ord + Copy>(x: T, y: T) -> (T, T) {
    let m = x.max(y);
    (m, m)
}

/// Leaderless phase-clock state: an interaction counter compared against a
/// threshold (`cte * clk` in the estimation protocol); threshold crossings
/// delimit epochs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseClockState {
    pub time: u32,
    pub threshold: u32,
    pub epoch: u32,
}

impl PhaseClockState {
    pub fn new(threshold: u32) -> Self {
        assert!(threshold >= 1);
        PhaseClockState {
            time: 0,
            threshold,
            epoch: 0,
        }
    }

    /// Counts one interaction. Returns whether the threshold has been
    /// reached; firing conditions beyond the count (and the subsequent
    /// reset) are the caller's business.
    #[inline]
    pub fn tick(&mut self) -> bool {
        if self.time < self.threshold {
            self.time += 1;
        }
        self.time >= self.threshold
    }

    /// Resets the counter and advances the epoch; called by the owner once
    /// its firing conditions hold.
    pub fn advance_epoch(&mut self) {
        self.time = 0;
        self.epoch += 1;
    }
}

/// Scriptable draw source: returns the listed values in order. Used by
/// tests and the pseudocode-transcription oracle to pin exact draw
/// sequences; once the script runs out it keeps returning 1 and remembers
/// that it overflowed.
#[derive(Debug, Clone)]
pub struct ScriptedDraws {
    values: Vec<u32>,
    cursor: usize,
    overflowed: bool,
}

impl ScriptedDraws {
    pub fn new(values: Vec<u32>) -> Self {
        ScriptedDraws {
            values,
            cursor: 0,
            overflowed: false,
        }
    }

    /// How many draws have been consumed (including overflow requests).
    pub fn used(&self) -> usize {
        self.cursor
    }

    /// Whether more draws were requested than the script provided.
    pub fn ran_out(&self) -> bool {
        self.overflowed
    }
}

impl GeometricDraws for ScriptedDraws {
    fn geometric_half(&mut self) -> u32 {
        let v = match self.values.get(self.cursor) {
            Some(&v) => v,
            None => {
                self.overflowed = true;
                1
            }
        };
        self.cursor += 1;
        v
    }
}

/// Restart for the randomized (A/S) variant: zeroes time, sum and epoch,
/// clears the done/deposit flags, and resamples `gr` fresh. Role, `clk` and
/// any already-copied output are preserved.
pub fn restart_randomized<R: GeometricDraws>(agent: &mut AgentState, rng: &mut R) {
    agent.time = 0;
    agent.sum = 0;
    agent.epoch = 0;
    agent.gr = rng.geometric_half();
    agent.protocol_done = false;
    agent.updated_sum = false;
}

/// Restart for the synthetic-coin (A/F) variant: as above, but `gr` returns
/// to 1 with its generated flag cleared so the agent re-derives it from
/// scheduler coins. The completed `clk` generation flag is kept.
pub fn restart_synthetic(agent: &mut AgentState) {
    agent.time = 0;
    agent.sum = 0;
    agent.epoch = 0;
    agent.gr = 1;
    agent.gr_generated = false;
    agent.protocol_done = false;
    agent.updated_sum = false;
}

/// Variant-dispatching restart.
pub fn restart<R: GeometricDraws>(agent: &mut AgentState, rng: &mut R, params: &ProtocolParams) {
    match params.variant {
        Variant::As => restart_randomized(agent, rng),
        Variant::Af => restart_synthetic(agent),
    }
}
