//! Cycle-level simulator for heterogeneous graph neural network (HGNN)
//! inference on a multi-channel, reconfigurable accelerator.
//!
//! The crate is organised bottom-up:
//!
//! - [`graph`]: heterogeneous graph model, text/binary ingestion, synthetic
//!   generators and the semantic graph build stage.
//! - [`engine`]: timing-free functional execution under the per-semantic and
//!   the semantics-complete paradigms, with memory ledgers and access traces.
//! - [`grouping`]: overlap hypergraph, modularity-driven streaming grouping,
//!   random/sequential baselines and the grouper timing model.
//! - [`memory`]: two-level FIFO feature cache and an analytical HBM model.
//! - [`accel`]: reconfigurable PE cycle models and the discrete-event
//!   channel simulator.
//! - [`metrics`]: derived metrics and functional/simulator cross checks.
//! - [`experiment`]: run configuration and the ablation ladder.

pub mod accel;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod grouping;
pub mod matrix;
pub mod memory;
pub mod metrics;

pub use error::{Error, Result};
