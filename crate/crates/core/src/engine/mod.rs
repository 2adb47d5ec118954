//! Timing-free functional execution of HGNN inference.
//!
//! [`run_per_semantic`] is the golden reference; [`run_semantics_complete`]
//! is the vertex-centric paradigm. Both report an [`IntermediateLedger`] of
//! live buffer bytes and an [`AccessTrace`] of logical feature reads.

mod exec;
mod ledger;
mod model;
mod trace;


pub use exec::{
    aggregation_coefficients, compute_edge_weight, feature_projection, run_per_semantic, run_semantics_complete,
    Projected, RunOutput,
};
pub use ledger::{
    expansion_ratio, expansion_ratio_from, initial_footprint, BufferRole, IntermediateLedger, LedgerEvent,
    LedgerEventKind,
};
pub use model::{leaky_relu, Activation, Model, ModelConfig, Variant};
pub use trace::{redundancy_fraction, AccessRecord, AccessTrace, ReadRole, Stage};
