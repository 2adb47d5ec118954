//! Run configuration and orchestration, including the four-step ablation
//! ladder (baseline, semantics-complete, multi-channel random grouping,
//! multi-channel overlap grouping).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::accel::{simulate_run, HwConfig, Paradigm, SimInputs, SimOutput};
use crate::engine::{run_per_semantic, run_semantics_complete, Model, ModelConfig, RunOutput};
use crate::error::{Error, Result};
use crate::graph::{
    build_semantic_graphs, generate_synthetic, load_graph, FeatureStore, GraphFormat, HetGraph, SemanticGraphSet,
    SyntheticSpec,
};
use crate::grouping::{
    build_hypergraph, group_overlap_driven, group_random, group_sequential, GroupPlan, GroupingStrategy,
    HypergraphConfig,
};
use crate::metrics::FunctionalSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Small,
    AmLike,
    Ablation,
    Dense,
}

/// Where the graph comes from: a file, or a synthetic profile with optional
/// overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub path: Option<PathBuf>,
    pub profile: Profile,
    pub targets: Option<u32>,
    pub relations: Option<usize>,
    pub alpha: Option<f64>,
    pub overlap: Option<f64>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            path: None,
            profile: Profile::Ablation,
            targets: None,
            relations: None,
            alpha: None,
            overlap: None,
        }
    }
}

impl GraphConfig {
    /// The synthetic spec this config describes for `seed`.
    pub fn synthetic_spec(&self, seed: u64) -> SyntheticSpec {
        let mut spec = match self.profile {
            Profile::Small => SyntheticSpec::small(
                self.targets.unwrap_or(1000),
                self.relations.unwrap_or(3),
                self.overlap.unwrap_or(0.5),
                seed,
            ),
            Profile::AmLike => SyntheticSpec::am_like(seed),
            Profile::Ablation => SyntheticSpec::ablation(self.overlap.unwrap_or(0.6), seed),
            Profile::Dense => SyntheticSpec::dense(seed),
        };
        if let Some(n) = self.targets {
            spec.num_targets = n;
        }
        if let Some(r) = self.relations {
            let template = spec.relations[0].clone();
            spec.relations.resize(r, template);
        }
        for rel in &mut spec.relations {
            if let Some(a) = self.alpha {
                rel.fanout.alpha = a;
            }
            if let Some(o) = self.overlap {
                rel.overlap = o;
            }
        }
        spec
    }

    pub fn load(&self, seed: u64) -> Result<(HetGraph, FeatureStore)> {
        match &self.path {
            Some(p) => load_graph(p, GraphFormat::from_path(p)),
            None => generate_synthetic(&self.synthetic_spec(seed)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    B,
    S,
    P,
    O,
}

impl Preset {
    pub const LADDER: [Preset; 4] = [Preset::B, Preset::S, Preset::P, Preset::O];

    pub fn name(self) -> &'static str {
        match self {
            Preset::B => "B",
            Preset::S => "S",
            Preset::P => "P",
            Preset::O => "O",
        }
    }

    /// `multi` is the channel count used by the multi-channel steps.
    pub fn run_spec(self, multi: usize) -> RunSpec {
        let (paradigm, grouping, channels) = match self {
            Preset::B => (Paradigm::PerSemantic, GroupingStrategy::Sequential, 1),
            Preset::S => (Paradigm::SemanticsComplete, GroupingStrategy::Sequential, 1),
            Preset::P => (Paradigm::SemanticsComplete, GroupingStrategy::Random, multi),
            Preset::O => (Paradigm::SemanticsComplete, GroupingStrategy::Overlap, multi),
        };
        RunSpec {
            name: self.name().to_string(),
            paradigm,
            grouping,
            channels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    /// Defaults to `<paradigm>-<grouping>-<channels>ch`.
    #[serde(default)]
    pub name: String,
    pub paradigm: Paradigm,
    pub grouping: GroupingStrategy,
    pub channels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroupingConfig {
    pub delta: f64,
    pub candidate_cap: Option<usize>,
}

impl Default for GroupingConfig {
    fn default() -> Self {
        let h = HypergraphConfig::default();
        Self {
            delta: h.delta,
            candidate_cap: h.candidate_cap,
        }
    }
}

impl GroupingConfig {
    pub fn hypergraph(&self) -> HypergraphConfig {
        HypergraphConfig {
            delta: self.delta,
            candidate_cap: self.candidate_cap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub graph: GraphConfig,
    pub model: ModelConfig,
    pub hardware: HwConfig,
    pub grouping: GroupingConfig,
    /// Explicit runs; when empty the ablation ladder is used.
    pub runs: Vec<RunSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            graph: GraphConfig::default(),
            model: ModelConfig::default(),
            hardware: HwConfig::default(),
            grouping: GroupingConfig::default(),
            runs: Vec::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.hardware.validate()?;
        if !(self.grouping.delta > 0.0 && self.grouping.delta <= 1.0) {
            return Err(Error::Config(format!("grouping delta must be in (0, 1], got {}", self.grouping.delta)));
        }
        for r in &self.runs {
            if r.channels == 0 {
                return Err(Error::Validation(format!("run {}: channels must be >= 1", r.name)));
            }
        }
        Ok(())
    }

    /// Requested runs, or the ladder with the configured channel count.
    pub fn resolved_runs(&self) -> Vec<RunSpec> {
        if self.runs.is_empty() {
            Preset::LADDER
                .iter()
                .map(|p| p.run_spec(self.hardware.channels.n_channels))
                .collect()
        } else {
            self.runs
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    if r.name.is_empty() {
                        r.name = format!("{}-{}-{}ch", r.paradigm.as_str(), r.grouping.as_str(), r.channels);
                    }
                    r
                })
                .collect()
        }
    }

    pub fn hw_for(&self, run: &RunSpec) -> HwConfig {
        let mut hw = self.hardware;
        hw.channels.n_channels = run.channels;
        hw
    }
}

/// Graph, semantic graphs and model shared by all runs of one experiment.
pub struct Prepared {
    pub graph: HetGraph,
    pub features: FeatureStore,
    pub semantic: SemanticGraphSet,
    pub model: Model,
    /// Identifies graph, features and model parameters.
    pub fingerprint: String,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let (graph, features) = cfg.graph.load(cfg.seed)?;
    let semantic = build_semantic_graphs(&graph, graph.target_type())?;
    let model = Model::init(cfg.model.clone(), &graph, &semantic)?;
    let model_json = serde_json::to_string(model.config()).expect("model config serializes");
    let fingerprint = {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(graph.fingerprint(&features).as_bytes());
        h.update(model_json.as_bytes());
        hex::encode(&h.finalize()[..16])
    };
    Ok(Prepared {
        graph,
        features,
        semantic,
        model,
        fingerprint,
    })
}

pub fn build_plan(prep: &Prepared, cfg: &ExperimentConfig, strategy: GroupingStrategy, channels: usize) -> Result<GroupPlan> {
    let n = prep.semantic.num_targets();
    match strategy {
        GroupingStrategy::Sequential => group_sequential(n, channels),
        GroupingStrategy::Random => group_random(n, channels, cfg.seed),
        GroupingStrategy::Overlap => {
            let h = build_hypergraph(&prep.semantic, &cfg.grouping.hypergraph())?;
            group_overlap_driven(&h, n, channels, cfg.seed)
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub debug_events: bool,
    pub access_log: bool,
    pub feature_sequence: bool,
}

pub struct RunResult {
    pub spec: RunSpec,
    pub plan: GroupPlan,
    pub sim: SimOutput,
}

pub fn run_one(prep: &Prepared, cfg: &ExperimentConfig, spec: &RunSpec, opts: RunOptions) -> Result<RunResult> {
    let hw = cfg.hw_for(spec);
    let plan = build_plan(prep, cfg, spec.grouping, spec.channels)?;
    let sim = simulate_run(&SimInputs {
        graph: &prep.graph,
        semantic: &prep.semantic,
        model: &prep.model,
        plan: &plan,
        paradigm: spec.paradigm,
        hw: &hw,
        debug_events: opts.debug_events,
        access_log: opts.access_log,
        feature_sequence: opts.feature_sequence,
    })?;
    Ok(RunResult {
        spec: spec.clone(),
        plan,
        sim,
    })
}

/// Functional execution of one paradigm; semantics-complete follows `order`.
pub fn run_functional(prep: &Prepared, paradigm: Paradigm, order: &[u32]) -> Result<RunOutput> {
    match paradigm {
        Paradigm::PerSemantic => run_per_semantic(&prep.graph, &prep.semantic, &prep.features, &prep.model),
        Paradigm::SemanticsComplete => {
            run_semantics_complete(&prep.graph, &prep.semantic, &prep.features, &prep.model, order)
        }
    }
}

pub fn functional_summary(prep: &Prepared, out: &RunOutput) -> Result<FunctionalSummary> {
    FunctionalSummary::from_run(&prep.fingerprint, out, &prep.graph, &prep.features)
}
