use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FeatureStore, HetGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BufferRole {
    ProjectedFeatures,
    NaIntermediate,
    Embeddings,
}

impl BufferRole {
    pub const ALL: [BufferRole; 3] = [
        BufferRole::ProjectedFeatures,
        BufferRole::NaIntermediate,
        BufferRole::Embeddings,
    ];

    fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BufferRole::ProjectedFeatures => "projected-features",
            BufferRole::NaIntermediate => "na-intermediate",
            BufferRole::Embeddings => "embeddings",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LedgerEventKind {
    Alloc,
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEvent {
    pub kind: LedgerEventKind,
    pub role: BufferRole,
    pub bytes: u64,
    pub running_bytes: u64,
}

/// Time-ordered allocation log of buffers produced during inference.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IntermediateLedger {
    events: Vec<LedgerEvent>,
    live: [u64; 3],
    peak_by_role: [u64; 3],
    running: u64,
    peak: u64,
    allocated: u64,
    freed: u64,
}

impl IntermediateLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn alloc(&mut self, role: BufferRole, bytes: u64) {
        let i = role.index();
        self.live[i] += bytes;
        self.peak_by_role[i] = self.peak_by_role[i].max(self.live[i]);
        self.running += bytes;
        self.peak = self.peak.max(self.running);
        self.allocated += bytes;
        self.events.push(LedgerEvent {
            kind: LedgerEventKind::Alloc,
            role,
            bytes,
            running_bytes: self.running,
        });
    }

    pub fn free(&mut self, role: BufferRole, bytes: u64) -> Result<()> {
        let i = role.index();
        if bytes > self.live[i] {
            return Err(Error::Ordering(format!(
                "freeing {bytes} bytes of {} with only {} live",
                role.as_str(),
                self.live[i]
            )));
        }
        self.live[i] -= bytes;
        self.running -= bytes;
        self.freed += bytes;
        self.events.push(LedgerEvent {
            kind: LedgerEventKind::Free,
            role,
            bytes,
            running_bytes: self.running,
        });
        Ok(())
    }

    pub fn events(&self) -> &[LedgerEvent] {
        &self.events
    }

    pub fn running(&self) -> u64 {
        self.running
    }

    pub fn peak(&self) -> u64 {
        self.peak
    }

    pub fn peak_of(&self, role: BufferRole) -> u64 {
        self.peak_by_role[role.index()]
    }

    pub fn live_of(&self, role: BufferRole) -> u64 {
        self.live[role.index()]
    }

    pub fn total_allocated(&self) -> u64 {
        self.allocated
    }

    pub fn total_freed(&self) -> u64 {
        self.freed
    }

    /// Releases every live buffer, leaving the ledger balanced at zero.
    pub fn free_all(&mut self) {
        for role in BufferRole::ALL {
            let live = self.live_of(role);
            if live > 0 {
                self.free(role, live).expect("live bytes available");
            }
        }
    }

    /// CSV `event,role,bytes,running_bytes`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "event,role,bytes,running_bytes")?;
        for e in &self.events {
            let kind = match e.kind {
                LedgerEventKind::Alloc => "alloc",
                LedgerEventKind::Free => "free",
            };
            writeln!(w, "{kind},{},{},{}", e.role.as_str(), e.bytes, e.running_bytes)?;
        }
        Ok(())
    }
}

/// Bytes of the dataset before inference: raw features plus adjacency.
pub fn initial_footprint(g: &HetGraph, features: &FeatureStore) -> u64 {
    features.byte_len() + g.adjacency_bytes()
}

/// `(initial footprint + peak live bytes) / initial footprint`.
pub fn expansion_ratio(ledger: &IntermediateLedger, g: &HetGraph, features: &FeatureStore) -> Result<f64> {
    expansion_ratio_from(ledger.peak(), initial_footprint(g, features))
}

pub fn expansion_ratio_from(peak_live: u64, initial: u64) -> Result<f64> {
    if initial == 0 {
        return Err(Error::UndefinedMetric("initial memory footprint is zero".into()));
    }
    Ok((initial + peak_live) as f64 / initial as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_tracks_running_maximum() {
        let mut l = IntermediateLedger::new();
        l.alloc(BufferRole::NaIntermediate, 100);
        l.alloc(BufferRole::Embeddings, 50);
        l.free(BufferRole::NaIntermediate, 100).unwrap();
        l.alloc(BufferRole::NaIntermediate, 30);
        assert_eq!(l.peak(), 150);
        assert_eq!(l.peak_of(BufferRole::NaIntermediate), 100);
        assert_eq!(l.running(), 80);
        l.free_all();
        assert_eq!(l.running(), 0);
        assert_eq!(l.total_allocated(), l.total_freed());
        assert!(l.events().iter().all(|e| e.running_bytes <= l.peak()));
    }

    #[test]
    fn over_free_is_rejected() {
        let mut l = IntermediateLedger::new();
        l.alloc(BufferRole::Embeddings, 8);
        assert!(matches!(l.free(BufferRole::NaIntermediate, 1), Err(Error::Ordering(_))));
    }

    #[test]
    fn expansion_ratio_edges() {
        assert_eq!(expansion_ratio_from(0, 1000).unwrap(), 1.0);
        assert_eq!(expansion_ratio_from(1000, 1000).unwrap(), 2.0);
        assert!(matches!(expansion_ratio_from(5, 0), Err(Error::UndefinedMetric(_))));
    }

    #[test]
    fn csv_header_and_rows() {
        let mut l = IntermediateLedger::new();
        l.alloc(BufferRole::ProjectedFeatures, 16);
        l.free(BufferRole::ProjectedFeatures, 16).unwrap();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(
            s,
            "event,role,bytes,running_bytes\nalloc,projected-features,16,16\nfree,projected-features,16,0\n"
        );
    }
}
