//! Headline metrics and consistency checks between the functional engine
//! and the simulator.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::accel::{Paradigm, SimReport};
use crate::engine::{expansion_ratio, redundancy_fraction, AccessTrace, RunOutput};
use crate::error::{Error, Result};
use crate::graph::{FeatureStore, HetGraph, VertexRef};
use crate::grouping::GroupingStrategy;
use crate::memory::MemCounters;

/// Paradigm-level numbers from a functional run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalSummary {
    pub fingerprint: String,
    pub expansion_ratio: f64,
    pub redundancy_fraction: f64,
    pub feature_reads: u64,
    pub peak_intermediate_bytes: u64,
}

impl FunctionalSummary {
    pub fn from_run(fingerprint: &str, out: &RunOutput, g: &HetGraph, features: &FeatureStore) -> Result<Self> {
        Ok(Self {
            fingerprint: fingerprint.to_string(),
            expansion_ratio: expansion_ratio(&out.ledger, g, features)?,
            redundancy_fraction: redundancy_fraction(&out.trace)?,
            feature_reads: out.trace.len() as u64,
            peak_intermediate_bytes: out.ledger.peak(),
        })
    }
}

/// A simulated run tagged with the fingerprint of its inputs.
#[derive(Debug, Clone, Copy)]
pub struct SimRun<'a> {
    pub name: &'a str,
    pub fingerprint: &'a str,
    pub report: &'a SimReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub dram_pj: f64,
    pub rpe_pj: f64,
    pub cache_pj: f64,
    pub grouper_pj: f64,
    pub total_pj: f64,
}

impl EnergyBreakdown {
    pub fn from_report(r: &SimReport) -> Self {
        let e = &r.hw.energy;
        let dram_pj = r.memory.dram_energy_pj;
        let rpe_pj = (r.busy_rpe_cycles + r.fp_busy_rpe_cycles) as f64 * e.rpe_pj_per_busy_cycle;
        let cache_pj = r.memory.onchip_energy_pj;
        let grouper_pj = r.grouper_cycles as f64 * e.grouper_pj_per_cycle;
        Self {
            dram_pj,
            rpe_pj,
            cache_pj,
            grouper_pj,
            total_pj: dram_pj + rpe_pj + cache_pj + grouper_pj,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub name: String,
    pub fingerprint: String,
    pub paradigm: Paradigm,
    pub strategy: GroupingStrategy,
    pub n_channels: usize,
    pub expansion_ratio: Option<f64>,
    pub redundancy_fraction: Option<f64>,
    pub cycles: u64,
    pub dram_bytes: u64,
    pub dram_feature_bytes: u64,
    pub dram_transactions: u64,
    pub energy: EnergyBreakdown,
    pub baseline: String,
    /// Baseline cycles over these cycles.
    pub speedup: f64,
}

pub fn consolidate(functional: Option<&FunctionalSummary>, sim: SimRun<'_>, baseline: SimRun<'_>) -> Result<MetricsBundle> {
    if let Some(f) = functional {
        if f.fingerprint != sim.fingerprint {
            return Err(Error::Validation(format!(
                "functional run {} does not match simulated run {}",
                f.fingerprint, sim.fingerprint
            )));
        }
    }
    if baseline.fingerprint != sim.fingerprint {
        return Err(Error::Validation(format!(
            "baseline {} was run on different inputs ({} vs {})",
            baseline.name, baseline.fingerprint, sim.fingerprint
        )));
    }
    let r = sim.report;
    if r.total_cycles == 0 {
        return Err(Error::UndefinedMetric("run took zero cycles".into()));
    }
    Ok(MetricsBundle {
        name: sim.name.to_string(),
        fingerprint: sim.fingerprint.to_string(),
        paradigm: r.paradigm,
        strategy: r.strategy,
        n_channels: r.hw.channels.n_channels,
        expansion_ratio: functional.map(|f| f.expansion_ratio),
        redundancy_fraction: functional.map(|f| f.redundancy_fraction),
        cycles: r.total_cycles,
        dram_bytes: r.memory.dram_bytes,
        dram_feature_bytes: r.memory.dram_feature_bytes(),
        dram_transactions: r.memory.dram_transactions,
        energy: EnergyBreakdown::from_report(r),
        baseline: baseline.name.to_string(),
        speedup: baseline.report.total_cycles as f64 / r.total_cycles as f64,
    })
}

pub const CSV_HEADER: &str = "name,paradigm,strategy,channels,cycles,speedup,dram_bytes,dram_feature_bytes,\
dram_transactions,dram_pj,rpe_pj,cache_pj,grouper_pj,total_pj,expansion_ratio,redundancy_fraction";

impl MetricsBundle {
    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.name,
            self.paradigm.as_str(),
            self.strategy.as_str(),
            self.n_channels,
            self.cycles,
            self.speedup,
            self.dram_bytes,
            self.dram_feature_bytes,
            self.dram_transactions,
            self.energy.dram_pj,
            self.energy.rpe_pj,
            self.energy.cache_pj,
            self.energy.grouper_pj,
            self.energy.total_pj,
            opt(self.expansion_ratio),
            opt(self.redundancy_fraction),
        )
    }
}

pub fn write_csv<W: Write>(bundles: &[MetricsBundle], mut w: W) -> Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for b in bundles {
        writeln!(w, "{}", b.csv_row())?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossCheck {
    pub pass: bool,
    pub trace_reads: u64,
    pub sim_reads: u64,
    pub trace_redundancy: Option<f64>,
    pub sim_redundancy: Option<f64>,
    /// First position where the two read sequences disagree.
    pub first_divergence: Option<usize>,
    pub message: String,
}

/// Compares the engine's feature-read trace against the simulator's feature
/// counters and, when given, its program-order read sequence.
pub fn cross_check(trace: &AccessTrace, counters: &MemCounters, sequence: Option<&[VertexRef]>) -> CrossCheck {
    let trace_reads = trace.len() as u64;
    let sim_reads = counters.feature_reads;
    let trace_redundancy = redundancy_fraction(trace).ok();
    let sim_redundancy = counters.feature_redundancy().ok();
    let mut first_divergence = None;
    let mut problems = Vec::new();

    if let Some(seq) = sequence {
        let recs = trace.records();
        first_divergence = recs
            .iter()
            .zip(seq)
            .position(|(r, v)| r.vertex != *v)
            .or((recs.len() != seq.len()).then(|| recs.len().min(seq.len())));
        if let Some(i) = first_divergence {
            problems.push(format!("read sequences diverge at index {i}"));
        }
    }
    if trace_reads != sim_reads {
        first_divergence.get_or_insert(trace_reads.min(sim_reads) as usize);
        problems.push(format!("trace has {trace_reads} feature reads, simulator {sim_reads}"));
    }
    if trace_redundancy != sim_redundancy {
        problems.push(format!(
            "redundancy differs: trace {trace_redundancy:?}, simulator {sim_redundancy:?}"
        ));
    }
    CrossCheck {
        pass: problems.is_empty(),
        trace_reads,
        sim_reads,
        trace_redundancy,
        sim_redundancy,
        first_divergence,
        message: if problems.is_empty() {
            "consistent".into()
        } else {
            problems.join("; ")
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{AccessRecord, ReadRole, Stage};
    use crate::experiment::{prepare, run_functional, run_one, ExperimentConfig, Preset, Profile, RunOptions};
    use crate::graph::VertexTypeId;

    fn small_cfg(seed: u64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = seed;
        cfg.graph.profile = Profile::Small;
        cfg.graph.targets = Some(200);
        cfg
    }

    fn read(id: u32) -> AccessRecord {
        AccessRecord {
            vertex: VertexRef::new(VertexTypeId(0), id),
            role: ReadRole::Neighbor,
            relation: None,
            stage: Stage::Na,
        }
    }

    #[test]
    fn bundle_against_itself_and_energy_sums() {
        let cfg = small_cfg(1);
        let prep = prepare(&cfg).unwrap();
        let r = run_one(&prep, &cfg, &Preset::B.run_spec(4), RunOptions::default()).unwrap();
        let run = SimRun {
            name: "B",
            fingerprint: &prep.fingerprint,
            report: &r.sim.report,
        };
        let b = consolidate(None, run, run).unwrap();
        assert_eq!(b.speedup, 1.0);
        let e = &b.energy;
        assert!((e.dram_pj + e.rpe_pj + e.cache_pj + e.grouper_pj - e.total_pj).abs() <= 1e-9 * e.total_pj);
        assert_eq!(e.dram_pj, b.dram_bytes as f64 * 56.0);
        let mut csv = Vec::new();
        write_csv(&[b], &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
    }

    #[test]
    fn mismatched_inputs_refuse_to_consolidate() {
        let cfg = small_cfg(2);
        let prep = prepare(&cfg).unwrap();
        let r = run_one(&prep, &cfg, &Preset::S.run_spec(4), RunOptions::default()).unwrap();
        let good = SimRun {
            name: "S",
            fingerprint: &prep.fingerprint,
            report: &r.sim.report,
        };
        let other = SimRun {
            fingerprint: "deadbeef",
            ..good
        };
        assert!(matches!(consolidate(None, good, other), Err(Error::Validation(_))));
        let out = run_functional(&prep, Paradigm::PerSemantic, &[]).unwrap();
        let mut f = FunctionalSummary::from_run("elsewhere", &out, &prep.graph, &prep.features).unwrap();
        assert!(consolidate(Some(&f), good, good).is_err());
        f.fingerprint = prep.fingerprint.clone();
        let b = consolidate(Some(&f), good, good).unwrap();
        assert_eq!(b.expansion_ratio, Some(f.expansion_ratio));
    }

    #[test]
    fn cross_check_locates_divergence() {
        let cfg = small_cfg(3);
        let prep = prepare(&cfg).unwrap();
        let opts = RunOptions {
            feature_sequence: true,
            ..RunOptions::default()
        };
        let r = run_one(&prep, &cfg, &Preset::O.run_spec(4), opts).unwrap();
        let out = run_functional(&prep, Paradigm::SemanticsComplete, &r.plan.vertex_order()).unwrap();
        let ok = cross_check(&out.trace, &r.sim.report.memory, Some(&r.sim.feature_sequence));
        assert!(ok.pass, "{}", ok.message);
        assert_eq!(ok.first_divergence, None);

        let mut recs = out.trace.records().to_vec();
        let last = recs.len() - 1;
        recs.pop();
        let short = AccessTrace::from_records(recs.clone());
        let bad = cross_check(&short, &r.sim.report.memory, Some(&r.sim.feature_sequence));
        assert!(!bad.pass);
        assert_eq!(bad.first_divergence, Some(last));

        recs.push(read(u32::MAX));
        recs.swap(0, last);
        let swapped = AccessTrace::from_records(recs);
        let bad = cross_check(&swapped, &r.sim.report.memory, Some(&r.sim.feature_sequence));
        assert_eq!(bad.first_divergence, Some(0));
    }

    #[test]
    fn star_redundancy_agrees() {
        // every one of 10 reads hits the same vertex: 9 of 10 are repeats
        let trace = AccessTrace::from_records((0..10).map(|_| read(7)).collect());
        let counters = MemCounters {
            feature_reads: 10,
            distinct_feature_keys: 1,
            ..MemCounters::default()
        };
        let cc = cross_check(&trace, &counters, None);
        assert!(cc.pass, "{}", cc.message);
        assert_eq!(cc.trace_redundancy, Some(0.9));
    }
}
