//! Reconfigurable processing element: a reduction tree whose first layer is
//! `L` multiply-or-accumulate units followed by `log2 L` adder levels and an
//! output accumulator that can feed partial results back to the inputs.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RpeMode {
    Linear,
    Aggregation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RpeConfig {
    /// First-layer MOA count `L`; a power of two.
    pub moa_count: u32,
    /// Cycles an unpaired vector waits for the fed-back partial sum.
    pub feedback_delay: u64,
}

impl Default for RpeConfig {
    fn default() -> Self {
        Self {
            moa_count: 4,
            feedback_delay: 3,
        }
    }
}

impl RpeConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.moa_count.is_power_of_two() {
            return Err(Error::Validation(format!("MOA count must be a power of two, got {}", self.moa_count)));
        }
        Ok(())
    }

    pub fn adder_count(&self) -> u32 {
        self.moa_count - 1
    }

    /// `log2(L) + 1`: MOA layer plus adder levels.
    pub fn tree_depth(&self) -> u64 {
        self.moa_count.trailing_zeros() as u64 + 1
    }

    /// Vectors reduced per pass; each MOA takes two input streams.
    pub fn vectors_per_pass(&self) -> u64 {
        2 * self.moa_count as u64
    }
}

/// `m` dot products of length `k` against a held operand:
/// `m * ceil(k / L) + log2(L) + 1`.
pub fn rpe_linear_cycles(k: u64, m: u64, cfg: &RpeConfig) -> u64 {
    if k == 0 || m == 0 {
        return 0;
    }
    m * k.div_ceil(cfg.moa_count as u64) + cfg.tree_depth()
}

/// Element-wise reduction of `n` vectors of width `d`:
/// `d * passes + log2(L) + 1`, plus the feedback delay when the final pass
/// holds an unpaired vector.
pub fn rpe_aggregation_cycles(n: u64, d: u64, cfg: &RpeConfig) -> u64 {
    if n == 0 || d == 0 {
        return 0;
    }
    let per_pass = cfg.vectors_per_pass();
    let passes = n.div_ceil(per_pass);
    let last = n - (passes - 1) * per_pass;
    d * passes + cfg.tree_depth() + if last % 2 == 1 { cfg.feedback_delay } else { 0 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RpeAction {
    /// A beat (one column chunk or one element position of a pass) enters the MOA layer.
    Issue { beat: u64 },
    /// Input stalled waiting for the feedback path.
    Bubble,
    /// A beat leaves the accumulator.
    Retire { beat: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RpeEvent {
    pub cycle: u64,
    pub action: RpeAction,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RpeTrace {
    pub events: Vec<RpeEvent>,
    /// Cycle of the last retirement (1-based), i.e. the workload latency.
    pub cycles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Beat(u64),
    Bubble,
}

/// Steps the pipeline cycle by cycle: `tree_depth` tree stages plus the
/// accumulator stage, one input slot per cycle.
fn run_pipeline(inputs: &[Slot], cfg: &RpeConfig) -> RpeTrace {
    let stages = cfg.tree_depth() as usize + 1;
    let mut pipe: VecDeque<Option<Slot>> = VecDeque::from(vec![None; stages]);
    let mut trace = RpeTrace::default();
    if inputs.iter().all(|s| *s == Slot::Bubble) {
        return trace;
    }
    let mut next = 0;
    let mut cycle = 0u64;
    loop {
        cycle += 1;
        // the slot entering this cycle occupies stage 0; the one in the last stage retires at its end
        let incoming = inputs.get(next).copied();
        if incoming.is_some() {
            next += 1;
        }
        pipe.pop_back();
        pipe.push_front(incoming);
        match incoming {
            Some(Slot::Beat(b)) => trace.events.push(RpeEvent {
                cycle,
                action: RpeAction::Issue { beat: b },
            }),
            Some(Slot::Bubble) => trace.events.push(RpeEvent {
                cycle,
                action: RpeAction::Bubble,
            }),
            None => {}
        }
        if let Some(Some(Slot::Beat(b))) = pipe.back() {
            trace.events.push(RpeEvent {
                cycle,
                action: RpeAction::Retire { beat: *b },
            });
            trace.cycles = cycle;
        }
        if next == inputs.len() && pipe.iter().take(stages - 1).all(Option::is_none) {
            break;
        }
    }
    trace
}

/// Structural simulation of a linear-mode workload.
pub fn simulate_linear(k: u64, m: u64, cfg: &RpeConfig) -> RpeTrace {
    let beats = m * k.div_ceil(cfg.moa_count as u64);
    let inputs: Vec<Slot> = (0..beats).map(Slot::Beat).collect();
    run_pipeline(&inputs, cfg)
}

/// Structural simulation of an aggregation-mode workload. Passes stream `d`
/// element beats each; before a final pass with an odd vector count the
/// input waits `feedback_delay` cycles so the accumulated partial can pair
/// with the unpaired vector.
pub fn simulate_aggregation(n: u64, d: u64, cfg: &RpeConfig) -> RpeTrace {
    if n == 0 || d == 0 {
        return RpeTrace::default();
    }
    let per_pass = cfg.vectors_per_pass();
    let mut inputs = Vec::new();
    let mut beat = 0;
    let mut remaining = n;
    while remaining > 0 {
        let in_pass = remaining.min(per_pass);
        remaining -= in_pass;
        if remaining == 0 && in_pass % 2 == 1 {
            inputs.extend((0..cfg.feedback_delay).map(|_| Slot::Bubble));
        }
        for _ in 0..d {
            inputs.push(Slot::Beat(beat));
            beat += 1;
        }
    }
    run_pipeline(&inputs, cfg)
}
