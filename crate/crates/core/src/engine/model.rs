use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{HetGraph, SemanticGraphSet, VertexTypeId};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Constant edge weight, mean over target and neighbors.
    RgcnLike,
    /// Single-head attention scores, softmax over target and neighbors.
    RgatLike,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Activation {
    Identity,
    Relu,
    LeakyRelu { slope: f32 },
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f32) -> f32 {
        match self {
            Activation::Identity => x,
            Activation::Relu => x.max(0.0),
            Activation::LeakyRelu { slope } => leaky_relu(x, slope),
        }
    }
}

#[inline]
pub fn leaky_relu(x: f32, slope: f32) -> f32 {
    if x >= 0.0 {
        x
    } else {
        slope * x
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub variant: Variant,
    pub d_hid: usize,
    pub activation: Activation,
    /// Negative slope of the attention score nonlinearity (rgat-like only).
    pub attention_slope: f32,
    /// Only single-head attention is supported.
    pub heads: usize,
    /// Per-relation fusion weights in semantic-set order; all ones when absent.
    pub fusion_weights: Option<Vec<f32>>,
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            variant: Variant::RgcnLike,
            d_hid: 64,
            activation: Activation::Relu,
            attention_slope: 0.2,
            heads: 1,
            fusion_weights: None,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d_hid == 0 {
            return Err(Error::Config("d_hid must be >= 1".into()));
        }
        if self.heads != 1 {
            return Err(Error::Config(format!(
                "only single-head attention is supported, got heads = {}",
                self.heads
            )));
        }
        if !self.attention_slope.is_finite() {
            return Err(Error::Config("attention_slope must be finite".into()));
        }
        if let Activation::LeakyRelu { slope } = self.activation {
            if !slope.is_finite() {
                return Err(Error::Config("activation slope must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Instantiated parameters for one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    config: ModelConfig,
    /// Per vertex type, `d_in(type) x d_hid`.
    projection: Vec<Matrix>,
    /// Per relation slot, length `2 * d_hid`.
    attention: Vec<Vec<f32>>,
    fusion: Vec<f32>,
}

impl Model {
    /// Deterministic uniform init in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` from `config.seed`.
    pub fn init(config: ModelConfig, graph: &HetGraph, semantic: &SemanticGraphSet) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let projection = graph
            .vertex_types()
            .iter()
            .map(|t| {
                let bound = 1.0 / (t.feature_dim.max(1) as f32).sqrt();
                let data = (0..t.feature_dim * config.d_hid)
                    .map(|_| rng.gen_range(-bound..=bound))
                    .collect();
                Matrix::from_vec(t.feature_dim, config.d_hid, data).expect("shape by construction")
            })
            .collect();
        let bound = 1.0 / ((2 * config.d_hid) as f32).sqrt();
        let attention = (0..semantic.num_relations())
            .map(|_| (0..2 * config.d_hid).map(|_| rng.gen_range(-bound..=bound)).collect())
            .collect();
        let fusion = match &config.fusion_weights {
            Some(w) if w.len() != semantic.num_relations() => {
                return Err(Error::Config(format!(
                    "{} fusion weights for {} relations",
                    w.len(),
                    semantic.num_relations()
                )))
            }
            Some(w) => w.clone(),
            None => vec![1.0; semantic.num_relations()],
        };
        let model = Self {
            config,
            projection,
            attention,
            fusion,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.config.d_hid;
        if self.projection.iter().any(|w| w.cols() != d || !w.is_finite()) {
            return Err(Error::Config("projection weights must be finite with d_hid columns".into()));
        }
        if self.attention.iter().any(|a| a.len() != 2 * d || a.iter().any(|x| !x.is_finite())) {
            return Err(Error::Config("attention vectors must be finite with length 2*d_hid".into()));
        }
        if self.fusion.iter().any(|b| !b.is_finite()) {
            return Err(Error::Config("fusion weights must be finite".into()));
        }
        Ok(())
    }

    pub fn config(&self) -> &ModelConfig {
        &self.config
    }

    pub fn d_hid(&self) -> usize {
        self.config.d_hid
    }

    pub fn variant(&self) -> Variant {
        self.config.variant
    }

    pub fn projection(&self, t: VertexTypeId) -> &Matrix {
        &self.projection[t.0 as usize]
    }

    pub fn attention(&self, slot: usize) -> &[f32] {
        &self.attention[slot]
    }

    pub fn fusion_weight(&self, slot: usize) -> f32 {
        self.fusion[slot]
    }

    pub fn num_relations(&self) -> usize {
        self.fusion.len()
    }

    pub fn set_projection(&mut self, t: VertexTypeId, w: Matrix) -> Result<()> {
        if w.rows() != self.projection[t.0 as usize].rows() || w.cols() != self.d_hid() {
            return Err(Error::Config("projection shape mismatch".into()));
        }
        self.projection[t.0 as usize] = w;
        self.validate()
    }

    pub fn set_attention(&mut self, slot: usize, a: Vec<f32>) -> Result<()> {
        if a.len() != 2 * self.d_hid() {
            return Err(Error::Config("attention length must be 2*d_hid".into()));
        }
        self.attention[slot] = a;
        self.validate()
    }

    /// Total parameter bytes (`f32`).
    pub fn byte_len(&self) -> u64 {
        let p: usize = self.projection.iter().map(|w| w.rows() * w.cols()).sum();
        let a: usize = self.attention.iter().map(Vec::len).sum();
        ((p + a + self.fusion.len()) * 4) as u64
    }
}
