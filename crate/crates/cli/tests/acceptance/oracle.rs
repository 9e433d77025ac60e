//! Independent straight-line transcription of the estimation transition,
//! written subprotocol-by-subprotocol, used to falsify the library
//! implementation by exhaustive enumeration at small n.
//!
//! The interpretive decisions shared by both the transcription and the
//! library (fixed once, here):
//!   1. the A-agent timer fires on `time >= cte*clk` together with the
//!      deposit acknowledgement, and the count saturates at `2*cte*clk`;
//!   2. the done latch and the S completion test use `>=` on the epoch
//!      target;
//!   3. a completed S computes `sum/epoch + 1`; a finished agent holding a
//!      value hands it to any partner that is unfinished or has no value;
//!   4. a role draw assigns `max(current clk, draw + offset)`;
//!   5. (synthetic-coin variant) coin flips require the pair to have been
//!      A-F before this interaction's partitioning, and gr max-propagation
//!      re-checks the generated flags after any banking.

use popsize::estimate::{AgentState, OutputRatio, ProtocolParams, Role, Variant};
use popsize::primitives::{GeometricDraws, ScriptedDraws};

fn draw_geometric(draws: &mut ScriptedDraws) -> u32 {
    draws.geometric_half()
}

// ---- randomized A/S variant ------------------------------------------------

fn partition_into_a_s(rec: &mut AgentState, sen: &mut AgentState, draws: &mut ScriptedDraws, p: &ProtocolParams) {
    if sen.role == Role::X && rec.role == Role::X {
        sen.role = Role::A;
        let g = draw_geometric(draws) + p.clk_offset;
        if g > sen.clk {
            sen.clk = g;
        }
        rec.role = Role::S;
    } else if sen.role == Role::A && rec.role == Role::X {
        rec.role = Role::S;
    } else if sen.role == Role::S && rec.role == Role::X {
        rec.role = Role::A;
        let g = draw_geometric(draws) + p.clk_offset;
        if g > rec.clk {
            rec.clk = g;
        }
    }
}

fn restart_a_s(agent: &mut AgentState, draws: &mut ScriptedDraws) {
    agent.time = 0;
    agent.sum = 0;
    agent.epoch = 0;
    agent.gr = draw_geometric(draws);
    agent.protocol_done = false;
    agent.updated_sum = false;
}

fn propagate_max_clock_value(
    a1: &mut AgentState,
    a2: &mut AgentState,
    draws: &mut ScriptedDraws,
    variant: Variant,
) {
    if a1.clk < a2.clk {
        a1.clk = a2.clk;
        match variant {
            Variant::As => restart_a_s(a1, draws),
            Variant::Af => restart_a_f(a1),
        }
    } else if a2.clk < a1.clk {
        a2.clk = a1.clk;
        match variant {
            Variant::As => restart_a_s(a2, draws),
            Variant::Af => restart_a_f(a2),
        }
    }
}

fn move_to_next_grv(agent: &mut AgentState, draws: &mut ScriptedDraws) {
    agent.time = 0;
    agent.gr = draw_geometric(draws);
    agent.updated_sum = false;
}

fn check_if_timer_done_and_increment_epoch(agent: &mut AgentState, draws: &mut ScriptedDraws, p: &ProtocolParams) {
    let threshold = p.cte * agent.clk;
    if agent.time < 2 * threshold {
        agent.time += 1;
    }
    if agent.time >= threshold && !agent.protocol_done && agent.updated_sum {
        agent.epoch += 1;
        move_to_next_grv(agent, draws);
    }
    if agent.epoch >= p.epoch_multiplier * agent.clk {
        agent.protocol_done = true;
    }
}

fn propagate_incremented_epoch(a1: &mut AgentState, a2: &mut AgentState, draws: &mut ScriptedDraws) {
    if a1.role == Role::A && a2.role == Role::A {
        if a1.epoch < a2.epoch {
            a1.epoch = a2.epoch;
            move_to_next_grv(a1, draws);
        } else if a2.epoch < a1.epoch {
            a2.epoch = a1.epoch;
            move_to_next_grv(a2, draws);
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

fn update_sum(a1: &mut AgentState, a2: &mut AgentState, p: &ProtocolParams) {
    let (a, s) = if a1.role == Role::A { (a1, a2) } else { (a2, a1) };
    if a.epoch == s.epoch && a.time >= p.cte * a.clk && !a.protocol_done {
        s.epoch += 1;
        s.sum += a.gr;
        a.updated_sum = true;
    } else if a.epoch < s.epoch {
        a.updated_sum = true;
    }
}

fn propagate_max_grv(a1: &mut AgentState, a2: &mut AgentState) {
    if a1.epoch == a2.epoch {
        if a1.gr < a2.gr {
            a1.gr = a2.gr;
        } else if a2.gr < a1.gr {
            a2.gr = a1.gr;
        }
    }
}

fn complete_s(agent: &mut AgentState, p: &ProtocolParams) {
    if agent.role == Role::S && !agent.protocol_done && agent.epoch >= p.epoch_multiplier * agent.clk {
        agent.output = Some(OutputRatio { sum: agent.sum, epochs: agent.epoch });
        agent.protocol_done = true;
    }
}

fn spread_output(a1: &mut AgentState, a2: &mut AgentState) {
    let take = |dst: &AgentState, src: &AgentState| {
        src.protocol_done && src.output.is_some() && (dst.output.is_none() || !dst.protocol_done)
    };
    if take(a1, a2) {
        a1.output = a2.output;
        a1.protocol_done = true;
    }
    if take(a2, a1) {
        a2.output = a1.output;
        a2.protocol_done = true;
    }
}

fn log_size_estimation_a_s(rec: &mut AgentState, sen: &mut AgentState, draws: &mut ScriptedDraws, p: &ProtocolParams) {
    partition_into_a_s(rec, sen, draws, p);
    if rec.role == Role::A {
        check_if_timer_done_and_increment_epoch(rec, draws, p);
    }
    if sen.role == Role::A {
        check_if_timer_done_and_increment_epoch(sen, draws, p);
    }
    propagate_max_clock_value(rec, sen, draws, Variant::As);
    propagate_incremented_epoch(rec, sen, draws);
    let a_s_pair = (rec.role == Role::A && sen.role == Role::S)
        || (rec.role == Role::S && sen.role == Role::A);
    if a_s_pair {
        update_sum(rec, sen, p);
    }
    if rec.role == Role::A && sen.role == Role::A {
        propagate_max_grv(rec, sen);
    }
    complete_s(rec, p);
    complete_s(sen, p);
    spread_output(rec, sen);
}

// ---- synthetic-coin A/F variant ---------------------------------------------

fn partition_into_a_f(rec: &mut AgentState, sen: &mut AgentState) {
    if sen.role == Role::X && rec.role == Role::X {
        sen.role = Role::A;
        rec.role = Role::F;
    } else if sen.role == Role::A && rec.role == Role::X {
        rec.role = Role::F;
    } else if sen.role == Role::F && rec.role == Role::X {
        rec.role = Role::A;
    }
}

fn restart_a_f(agent: &mut AgentState) {
    agent.time = 0;
    agent.sum = 0;
    agent.epoch = 0;
    agent.gr = 1;
    agent.gr_generated = false;
    agent.protocol_done = false;
    agent.updated_sum = false;
}

fn update_sum_a_f(agent: &mut AgentState) {
    agent.sum += agent.gr;
    agent.time = 0;
    agent.gr = 1;
    agent.gr_generated = false;
}

fn check_if_timer_done_a_f(agent: &mut AgentState, p: &ProtocolParams) {
    let threshold = p.cte * agent.clk;
    if agent.time < 2 * threshold {
        agent.time += 1;
    }
    if agent.time >= threshold && !agent.protocol_done {
        agent.epoch += 1;
        update_sum_a_f(agent);
    }
    if agent.epoch >= p.epoch_multiplier * agent.clk && !agent.protocol_done {
        agent.protocol_done = true;
        agent.output = Some(OutputRatio { sum: agent.sum, epochs: agent.epoch });
    }
}

fn generate_clock(rec: &mut AgentState, sen: &mut AgentState, p: &ProtocolParams) {
    if sen.role == Role::A {
        sen.clk += 1;
    } else if rec.role == Role::A {
        rec.clk_generated = true;
        rec.clk += p.clk_offset;
    }
}

fn generate_grv(rec: &mut AgentState, sen: &mut AgentState) {
    if sen.role == Role::A {
        sen.gr += 1;
    } else if rec.role == Role::A {
        rec.gr_generated = true;
    }
}

fn propagate_incremented_epoch_a_f(a1: &mut AgentState, a2: &mut AgentState) {
    if a1.epoch < a2.epoch {
        a1.epoch = a2.epoch;
        update_sum_a_f(a1);
    } else if a2.epoch < a1.epoch {
        a2.epoch = a1.epoch;
        update_sum_a_f(a2);
    }
}

fn log_size_estimation_a_f(rec: &mut AgentState, sen: &mut AgentState, p: &ProtocolParams) {
    let was_a_f_pair = (rec.role == Role::A && sen.role == Role::F)
        || (rec.role == Role::F && sen.role == Role::A);
    partition_into_a_f(rec, sen);
    if rec.role == Role::A {
        check_if_timer_done_a_f(rec, p);
    }
    if sen.role == Role::A {
        check_if_timer_done_a_f(sen, p);
    }
    if was_a_f_pair {
        let (clk_done, gr_done) = if rec.role == Role::A {
            (rec.clk_generated, rec.gr_generated)
        } else {
            (sen.clk_generated, sen.gr_generated)
        };
        if !clk_done {
            generate_clock(rec, sen, p);
        } else if !gr_done {
            generate_grv(rec, sen);
        }
    }
    if rec.role == Role::A && sen.role == Role::A && rec.clk_generated && sen.clk_generated {
        let mut no_draws = ScriptedDraws::new(vec![]);
        propagate_max_clock_value(rec, sen, &mut no_draws, Variant::Af);
        assert!(!no_draws.ran_out(), "A/F must not consume draws");
        if rec.gr_generated && sen.gr_generated {
            propagate_incremented_epoch_a_f(rec, sen);
            if rec.gr_generated && sen.gr_generated {
                propagate_max_grv(rec, sen);
            }
        }
    }
}

/// The oracle transition: applies the transcription of the given variant to
/// the (receiver, sender) pair.
pub fn transition(
    rec: &mut AgentState,
    sen: &mut AgentState,
    draws: &mut ScriptedDraws,
    params: &ProtocolParams,
) {
    match params.variant {
        Variant::As => log_size_estimation_a_s(rec, sen, draws, params),
        Variant::Af => log_size_estimation_a_f(rec, sen, params),
    }
}
