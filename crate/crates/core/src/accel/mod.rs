//! Cycle-level model of the multi-channel accelerator.
//!
//! Execution is a deterministic discrete-event simulation. Feature
//! projection runs first with every RPE in linear mode; after a mode switch
//! the channels consume their groups in release order under the chosen
//! execution paradigm. Durations come from the RPE closed forms; memory
//! timing and traffic come from [`crate::memory::MemorySystem`].

mod rpe;
mod sim;

use serde::{Deserialize, Serialize};

use crate::engine::Variant;
use crate::error::{Error, Result};
use crate::grouping::{GroupingStrategy, GrouperHwConfig};
use crate::memory::{MemCounters, MemoryConfig};

pub use rpe::{
    rpe_aggregation_cycles, rpe_linear_cycles, simulate_aggregation, simulate_linear, RpeAction, RpeConfig, RpeEvent,
    RpeMode, RpeTrace,
};
pub use sim::{simulate_run, SimEvent, SimInputs, SimOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Paradigm {
    PerSemantic,
    SemanticsComplete,
}

impl Paradigm {
    pub fn as_str(self) -> &'static str {
        match self {
            Paradigm::PerSemantic => "per-semantic",
            Paradigm::SemanticsComplete => "semantics-complete",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelConfig {
    pub n_channels: usize,
    pub rpes_per_channel: u32,
    /// Share of a channel's RPEs in aggregation mode after projection;
    /// defaults to 0.75 for attention models and 1.0 otherwise.
    pub aggregation_fraction: Option<f64>,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            n_channels: 4,
            rpes_per_channel: 512,
            aggregation_fraction: None,
        }
    }
}

impl ChannelConfig {
    pub fn total_rpes(&self) -> u64 {
        self.n_channels as u64 * self.rpes_per_channel as u64
    }

    /// `(aggregation, linear)` RPEs per channel for the aggregation phases.
    pub fn split(&self, variant: Variant) -> (u32, u32) {
        let frac = self.aggregation_fraction.unwrap_or(match variant {
            Variant::RgcnLike => 1.0,
            Variant::RgatLike => 0.75,
        });
        let agg = ((self.rpes_per_channel as f64 * frac).round() as u32).clamp(1, self.rpes_per_channel);
        let lin = self.rpes_per_channel - agg;
        match variant {
            Variant::RgatLike if lin == 0 && self.rpes_per_channel > 1 => (agg - 1, 1),
            _ => (agg, lin),
        }
    }
}

/// Placeholder energy constants for the non-DRAM components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyConfig {
    pub rpe_pj_per_busy_cycle: f64,
    pub grouper_pj_per_cycle: f64,
}

impl Default for EnergyConfig {
    fn default() -> Self {
        Self {
            rpe_pj_per_busy_cycle: 4.0,
            grouper_pj_per_cycle: 50.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HwConfig {
    pub channels: ChannelConfig,
    pub rpe: RpeConfig,
    pub memory: MemoryConfig,
    pub grouper: GrouperHwConfig,
    pub energy: EnergyConfig,
    pub mode_switch_cycles: u64,
    pub activation_cycles: u64,
    /// On-chip room for per-relation intermediates; defaults to the global cache size.
    pub intermediate_onchip_bytes: Option<u64>,
}

impl Default for HwConfig {
    fn default() -> Self {
        Self {
            channels: ChannelConfig::default(),
            rpe: RpeConfig::default(),
            memory: MemoryConfig::default(),
            grouper: GrouperHwConfig::default(),
            energy: EnergyConfig::default(),
            mode_switch_cycles: 1,
            activation_cycles: 1,
            intermediate_onchip_bytes: None,
        }
    }
}

impl HwConfig {
    pub fn with_channels(n_channels: usize) -> Self {
        let mut hw = Self::default();
        hw.channels.n_channels = n_channels;
        hw
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.channels;
        if c.n_channels == 0 || c.rpes_per_channel == 0 {
            return Err(Error::Validation("channels and RPEs per channel must be >= 1".into()));
        }
        if let Some(f) = c.aggregation_fraction {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::Validation(format!("aggregation fraction must be in (0, 1], got {f}")));
            }
        }
        if self.grouper.n_mac == 0 {
            return Err(Error::Validation("grouper needs at least one MAC".into()));
        }
        self.rpe.validate()?;
        self.memory.validate()
    }

    pub fn intermediate_capacity(&self) -> u64 {
        self.intermediate_onchip_bytes.unwrap_or(self.memory.cache.global_bytes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub finish_cycle: u64,
    pub stall_cycles: u64,
    pub busy_rpe_cycles: u64,
    pub groups: usize,
    pub work_items: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub paradigm: Paradigm,
    pub strategy: GroupingStrategy,
    pub variant: Variant,
    pub total_cycles: u64,
    pub fp_cycles: u64,
    pub na_start_cycle: u64,
    pub na_cycles: u64,
    pub grouper_cycles: u64,
    pub channels: Vec<ChannelReport>,
    pub stall_cycles: u64,
    pub fp_busy_rpe_cycles: u64,
    pub busy_rpe_cycles: u64,
    pub rpe_utilization: f64,
    pub memory: MemCounters,
    pub hw: HwConfig,
}
