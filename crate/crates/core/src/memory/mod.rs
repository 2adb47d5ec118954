//! Two-level feature cache and an analytical HBM model.
//!
//! Every channel owns a local FIFO cache; all channels share a global FIFO
//! cache. A miss in both fetches from HBM and fills both levels. HBM is a
//! fixed latency behind a byte-granular bandwidth queue; each cache level
//! also has a port with its own bandwidth queue.

mod cache;

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::VertexRef;

pub use cache::FifoCache;

pub const MIB: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CacheConfig {
    pub global_bytes: u64,
    pub local_bytes: u64,
    pub line_bytes: u64,
    pub local_hit_latency: u64,
    pub global_hit_latency: u64,
    /// Bytes per cycle through each channel's local port; 0 disables the limit.
    pub local_port_bytes_per_cycle: u64,
    /// Bytes per cycle through the shared global port; 0 disables the limit.
    pub global_port_bytes_per_cycle: u64,
    /// Placeholder on-chip access energies, not calibrated.
    pub local_pj_per_byte: f64,
    pub global_pj_per_byte: f64,
}

impl Default for CacheConfig {
    fn default() -> Self {
        Self {
            global_bytes: 2 * MIB,
            local_bytes: MIB,
            line_bytes: 64,
            local_hit_latency: 1,
            global_hit_latency: 4,
            local_port_bytes_per_cycle: 256,
            global_port_bytes_per_cycle: 512,
            local_pj_per_byte: 0.2,
            global_pj_per_byte: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HbmConfig {
    pub bytes_per_cycle: u64,
    pub latency: u64,
    pub transaction_bytes: u64,
    pub pj_per_bit: f64,
}

impl Default for HbmConfig {
    fn default() -> Self {
        Self {
            bytes_per_cycle: 512,
            latency: 100,
            transaction_bytes: 64,
            pj_per_bit: 7.0,
        }
    }
}

/// On-chip buffer capacities, used as capacity checks only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BufferConfig {
    pub weight_bytes: u64,
    pub target_bytes: u64,
    pub attention_bytes: u64,
    pub adjacency_bytes: u64,
    pub grouper_bytes: u64,
}

impl Default for BufferConfig {
    fn default() -> Self {
        let mb = |x: f64| (x * MIB as f64) as u64;
        Self {
            weight_bytes: mb(1.64),
            target_bytes: mb(0.60),
            attention_bytes: mb(1.00),
            adjacency_bytes: mb(1.40),
            grouper_bytes: mb(1.20),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MemoryConfig {
    pub cache: CacheConfig,
    pub hbm: HbmConfig,
    pub buffers: BufferConfig,
}

impl MemoryConfig {
    pub fn validate(&self) -> Result<()> {
        let c = &self.cache;
        if c.line_bytes == 0 || self.hbm.transaction_bytes == 0 {
            return Err(Error::Validation("line and transaction sizes must be >= 1".into()));
        }
        if self.hbm.bytes_per_cycle == 0 {
            return Err(Error::Validation("HBM bandwidth must be >= 1 byte/cycle".into()));
        }
        if !(self.hbm.pj_per_bit >= 0.0) || !(c.local_pj_per_byte >= 0.0) || !(c.global_pj_per_byte >= 0.0) {
            return Err(Error::Validation("energy constants must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MemRole {
    RawFeature,
    ProjectedFeature,
    Adjacency,
    Weights,
    IntermediateNa,
}

impl MemRole {
    pub const ALL: [MemRole; 5] = [
        MemRole::RawFeature,
        MemRole::ProjectedFeature,
        MemRole::Adjacency,
        MemRole::Weights,
        MemRole::IntermediateNa,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            MemRole::RawFeature => "raw-feature",
            MemRole::ProjectedFeature => "projected-feature",
            MemRole::Adjacency => "adjacency",
            MemRole::Weights => "weights",
            MemRole::IntermediateNa => "intermediate-na",
        }
    }

    /// Feature-vector data as opposed to structure and parameters.
    pub fn is_feature(self) -> bool {
        matches!(self, MemRole::RawFeature | MemRole::ProjectedFeature | MemRole::IntermediateNa)
    }
}

/// Which version of a vertex's feature vector a cache line holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataStage {
    Raw,
    Projected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub vertex: VertexRef,
    pub stage: DataStage,
}

impl CacheKey {
    pub fn projected(vertex: VertexRef) -> Self {
        Self {
            vertex,
            stage: DataStage::Projected,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HitLevel {
    Local,
    Global,
    Dram,
}

impl HitLevel {
    pub fn as_str(self) -> &'static str {
        match self {
            HitLevel::Local => "local",
            HitLevel::Global => "global",
            HitLevel::Dram => "dram",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Access {
    pub level: HitLevel,
    /// Cycle at which the data is available to the requester.
    pub ready: u64,
}

impl Access {
    pub fn latency(&self, now: u64) -> u64 {
        self.ready - now
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoleCounters {
    pub requests: u64,
    pub bytes: u64,
    pub dram_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RoleTable {
    pub raw_feature: RoleCounters,
    pub projected_feature: RoleCounters,
    pub adjacency: RoleCounters,
    pub weights: RoleCounters,
    pub intermediate_na: RoleCounters,
}

impl RoleTable {
    pub fn get(&self, role: MemRole) -> &RoleCounters {
        match role {
            MemRole::RawFeature => &self.raw_feature,
            MemRole::ProjectedFeature => &self.projected_feature,
            MemRole::Adjacency => &self.adjacency,
            MemRole::Weights => &self.weights,
            MemRole::IntermediateNa => &self.intermediate_na,
        }
    }

    fn get_mut(&mut self, role: MemRole) -> &mut RoleCounters {
        match role {
            MemRole::RawFeature => &mut self.raw_feature,
            MemRole::ProjectedFeature => &mut self.projected_feature,
            MemRole::Adjacency => &mut self.adjacency,
            MemRole::Weights => &mut self.weights,
            MemRole::IntermediateNa => &mut self.intermediate_na,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MemCounters {
    /// Cache lookups; equals `local_hits + global_hits + dram_fills`.
    pub accesses: u64,
    pub local_hits: u64,
    pub global_hits: u64,
    pub dram_fills: u64,
    /// Lookups of projected feature vectors and how many distinct keys they touched.
    pub feature_reads: u64,
    pub distinct_feature_keys: u64,
    pub local_evictions: u64,
    pub global_evictions: u64,
    pub roles: RoleTable,
    pub dram_transactions: u64,
    pub dram_bytes: u64,
    pub dram_read_bytes: u64,
    pub dram_write_bytes: u64,
    pub dram_energy_pj: f64,
    pub local_hit_bytes: u64,
    pub global_hit_bytes: u64,
    pub onchip_energy_pj: f64,
    pub peak_offchip_intermediate_bytes: u64,
    /// Cycle at which the last transaction retired.
    pub drained_at: u64,
}

impl MemCounters {
    /// DRAM bytes of feature-vector data (raw, projected and NA intermediates).
    pub fn dram_feature_bytes(&self) -> u64 {
        MemRole::ALL
            .iter()
            .filter(|r| r.is_feature())
            .map(|&r| self.roles.get(r).dram_bytes)
            .sum()
    }

    /// Redundancy of projected-feature reads recomputed from counters.
    pub fn feature_redundancy(&self) -> Result<f64> {
        if self.feature_reads == 0 {
            return Err(Error::UndefinedMetric("no feature reads".into()));
        }
        Ok((self.feature_reads - self.distinct_feature_keys) as f64 / self.feature_reads as f64)
    }
}

/// Byte-granular bandwidth queue; positions are in `1 / bytes_per_cycle` cycle units.
#[derive(Debug, Clone, Copy)]
struct Port {
    bytes_per_cycle: u64,
    pos: u64,
}

impl Port {
    fn new(bytes_per_cycle: u64) -> Self {
        Self { bytes_per_cycle, pos: 0 }
    }

    /// Transfers `bytes` starting no earlier than `now`; returns the finishing cycle.
    fn transfer(&mut self, now: u64, bytes: u64) -> u64 {
        if self.bytes_per_cycle == 0 {
            return now;
        }
        let start = self.pos.max(now * self.bytes_per_cycle);
        self.pos = start + bytes;
        self.pos.div_ceil(self.bytes_per_cycle)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccessLogEntry {
    pub cycle: u64,
    pub key: String,
    pub role: MemRole,
    pub level: HitLevel,
    pub bytes: u64,
}

impl AccessLogEntry {
    /// `cycle,key,role,level,bytes`
    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.cycle, self.key, self.role.as_str(), self.level.as_str(), self.bytes)
    }
}

#[derive(Debug, Clone)]
pub struct MemorySystem {
    cfg: MemoryConfig,
    global: FifoCache<CacheKey>,
    local: Vec<FifoCache<CacheKey>>,
    global_port: Port,
    local_ports: Vec<Port>,
    hbm: Port,
    counters: MemCounters,
    seen_features: HashSet<CacheKey>,
    offchip_intermediate: u64,
    log: Option<Vec<AccessLogEntry>>,
    drained: bool,
}

impl MemorySystem {
    pub fn new(cfg: MemoryConfig, n_channels: usize) -> Result<Self> {
        cfg.validate()?;
        if n_channels == 0 {
            return Err(Error::Validation("at least one channel is required".into()));
        }
        let lines = |bytes: u64| bytes / cfg.cache.line_bytes;
        Ok(Self {
            cfg,
            global: FifoCache::new(lines(cfg.cache.global_bytes)),
            local: (0..n_channels).map(|_| FifoCache::new(lines(cfg.cache.local_bytes))).collect(),
            global_port: Port::new(cfg.cache.global_port_bytes_per_cycle),
            local_ports: vec![Port::new(cfg.cache.local_port_bytes_per_cycle); n_channels],
            hbm: Port::new(cfg.hbm.bytes_per_cycle),
            counters: MemCounters::default(),
            seen_features: HashSet::new(),
            offchip_intermediate: 0,
            log: None,
            drained: false,
        })
    }

    pub fn config(&self) -> &MemoryConfig {
        &self.cfg
    }

    pub fn enable_log(&mut self) {
        self.log.get_or_insert_with(Vec::new);
    }

    pub fn log(&self) -> Option<&[AccessLogEntry]> {
        self.log.as_deref()
    }

    pub fn lines(&self, bytes: u64) -> u64 {
        bytes.div_ceil(self.cfg.cache.line_bytes)
    }

    fn record(&mut self, now: u64, key: String, role: MemRole, level: HitLevel, bytes: u64) {
        if let Some(log) = &mut self.log {
            log.push(AccessLogEntry {
                cycle: now,
                key,
                role,
                level,
                bytes,
            });
        }
    }

    fn hbm_transfer(&mut self, now: u64, bytes: u64, role: MemRole, write: bool) -> u64 {
        let tx = bytes.div_ceil(self.cfg.hbm.transaction_bytes);
        let charged = tx * self.cfg.hbm.transaction_bytes;
        let c = &mut self.counters;
        c.dram_transactions += tx;
        c.dram_bytes += charged;
        if write {
            c.dram_write_bytes += charged;
        } else {
            c.dram_read_bytes += charged;
        }
        c.roles.get_mut(role).dram_bytes += charged;
        let done = self.hbm.transfer(now, charged) + self.cfg.hbm.latency;
        self.counters.drained_at = self.counters.drained_at.max(done);
        done
    }

    /// Looks a feature vector up local -> global -> HBM.
    pub fn access(&mut self, key: CacheKey, bytes: u64, role: MemRole, channel: usize, now: u64) -> Access {
        self.drained = false;
        let lines = self.lines(bytes);
        let line_bytes = lines * self.cfg.cache.line_bytes;
        let c = &mut self.counters;
        c.accesses += 1;
        let rc = c.roles.get_mut(role);
        rc.requests += 1;
        rc.bytes += bytes;
        if role == MemRole::ProjectedFeature {
            c.feature_reads += 1;
            if self.seen_features.insert(key) {
                c.distinct_feature_keys += 1;
            }
        }

        let cc = self.cfg.cache;
        let (level, ready) = if self.local[channel].contains(&key) {
            self.counters.local_hits += 1;
            self.counters.local_hit_bytes += line_bytes;
            let port = self.local_ports[channel].transfer(now, line_bytes);
            (HitLevel::Local, port.max(now + cc.local_hit_latency))
        } else if self.global.contains(&key) {
            self.counters.global_hits += 1;
            self.counters.global_hit_bytes += line_bytes;
            let port = self.global_port.transfer(now, line_bytes);
            self.counters.local_evictions += self.local[channel].insert(key, lines).len() as u64;
            (HitLevel::Global, port.max(now + cc.global_hit_latency))
        } else {
            self.counters.dram_fills += 1;
            let ready = self.hbm_transfer(now, bytes, role, false);
            self.counters.global_evictions += self.global.insert(key, lines).len() as u64;
            self.counters.local_evictions += self.local[channel].insert(key, lines).len() as u64;
            (HitLevel::Dram, ready)
        };
        if self.log.is_some() {
            let k = format!("{}:{:?}", key.vertex, key.stage).to_lowercase();
            self.record(now, k, role, level, bytes);
        }
        Access { level, ready }
    }

    /// Places a freshly produced vector in the global cache without HBM traffic.
    pub fn fill_global(&mut self, key: CacheKey, bytes: u64) {
        let lines = self.lines(bytes);
        self.counters.global_evictions += self.global.insert(key, lines).len() as u64;
    }

    /// Streams bytes from HBM, bypassing the caches.
    pub fn dram_read(&mut self, bytes: u64, role: MemRole, now: u64) -> u64 {
        self.drained = false;
        let rc = self.counters.roles.get_mut(role);
        rc.requests += 1;
        rc.bytes += bytes;
        let done = self.hbm_transfer(now, bytes, role, false);
        self.record(now, String::new(), role, HitLevel::Dram, bytes);
        done
    }

    pub fn dram_write(&mut self, bytes: u64, role: MemRole, now: u64) -> u64 {
        self.drained = false;
        let rc = self.counters.roles.get_mut(role);
        rc.requests += 1;
        rc.bytes += bytes;
        let done = self.hbm_transfer(now, bytes, role, true);
        self.record(now, String::new(), role, HitLevel::Dram, bytes);
        done
    }

    /// Tracks NA intermediates resident off-chip.
    pub fn spill_intermediate(&mut self, bytes: u64) {
        self.offchip_intermediate += bytes;
        let c = &mut self.counters;
        c.peak_offchip_intermediate_bytes = c.peak_offchip_intermediate_bytes.max(self.offchip_intermediate);
    }

    pub fn release_intermediate(&mut self, bytes: u64) {
        self.offchip_intermediate = self.offchip_intermediate.saturating_sub(bytes);
    }

    pub fn counters(&self) -> &MemCounters {
        &self.counters
    }

    /// Retires everything in flight by `now` and freezes the counters with
    /// energies computed from bytes.
    pub fn drain_and_report(&mut self, now: u64) -> Result<MemCounters> {
        if now < self.counters.drained_at {
            return Err(Error::Ordering(format!(
                "drain at cycle {now} with transactions in flight until {}",
                self.counters.drained_at
            )));
        }
        self.drained = true;
        let mut c = self.counters.clone();
        c.dram_energy_pj = dram_energy_pj(c.dram_bytes, &self.cfg.hbm);
        c.onchip_energy_pj = c.local_hit_bytes as f64 * self.cfg.cache.local_pj_per_byte
            + c.global_hit_bytes as f64 * self.cfg.cache.global_pj_per_byte;
        c.local_evictions = self.local.iter().map(|l| l.evictions()).sum();
        c.global_evictions = self.global.evictions();
        Ok(c)
    }

    pub fn is_drained(&self) -> bool {
        self.drained
    }

    /// CSV `cycle,key,role,level,bytes`.
    pub fn write_log_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "cycle,key,role,level,bytes")?;
        for e in self.log.iter().flatten() {
            writeln!(w, "{}", e.csv_row())?;
        }
        Ok(())
    }
}

pub fn dram_energy_pj(bytes: u64, hbm: &HbmConfig) -> f64 {
    bytes as f64 * 8.0 * hbm.pj_per_bit
}
