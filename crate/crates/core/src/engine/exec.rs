//! Functional execution of one HGNN layer under both paradigms.
//!
//! Both paradigms share the per-(vertex, relation) aggregation kernel and the
//! fusion kernel, and walk each neighbor list in the same order, so their
//! floating-point results agree bit for bit. They differ only in schedule,
//! which shows up in the ledger (what is live when) and the access trace
//! (what is read how often).

use super::ledger::{BufferRole, IntermediateLedger};
use super::model::{leaky_relu, Model, Variant};
use super::trace::{AccessTrace, ReadRole, Stage};
use crate::error::{Error, Result};
use crate::graph::{FeatureStore, HetGraph, SemanticGraphSet, VertexRef, VertexTypeId};
use crate::matrix::Matrix;

/// Projected features `h'` per vertex type (`count x d_hid`).
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    per_type: Vec<Matrix>,
}

impl Projected {
    #[inline]
    pub fn row(&self, v: VertexRef) -> &[f32] {
        self.per_type[v.vtype.0 as usize].row(v.id as usize)
    }

    pub fn of_type(&self, t: VertexTypeId) -> &Matrix {
        &self.per_type[t.0 as usize]
    }

    pub fn byte_len(&self) -> u64 {
        self.per_type.iter().map(Matrix::byte_len).sum()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub embeddings: Matrix,
    pub projected: Projected,
    pub ledger: IntermediateLedger,
    /// Projected-feature reads made by aggregation and fusion.
    pub trace: AccessTrace,
    /// Raw-feature reads made by projection (one per vertex).
    pub projection_trace: AccessTrace,
}

/// `h'_v = x_v W_{T_v}` for every vertex.
pub fn feature_projection(
    g: &HetGraph,
    features: &FeatureStore,
    model: &Model,
    ledger: &mut IntermediateLedger,
    trace: &mut AccessTrace,
) -> Result<Projected> {
    let d = model.d_hid();
    let mut per_type = Vec::with_capacity(g.vertex_types().len());
    for t in g.type_ids() {
        let vt = g.vertex_type(t);
        let w = model.projection(t);
        let x = features.raw(t);
        if x.cols() != w.rows() || x.rows() != vt.count as usize {
            return Err(Error::Validation(format!(
                "features of {} are {}x{}, projection expects {} inputs",
                vt.name,
                x.rows(),
                x.cols(),
                w.rows()
            )));
        }
        let role = if t == g.target_type() {
            ReadRole::Target
        } else {
            ReadRole::Neighbor
        };
        let mut out = Matrix::zeros(vt.count as usize, d);
        for i in 0..vt.count as usize {
            trace.push(VertexRef::new(t, i as u32), role, None, Stage::Fp);
            let xi = x.row(i);
            let oi = out.row_mut(i);
            for (k, &xk) in xi.iter().enumerate() {
                if xk == 0.0 {
                    continue;
                }
                for (o, &wkj) in oi.iter_mut().zip(w.row(k)) {
                    *o += xk * wkj;
                }
            }
            if oi.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numeric {
                    vertex: VertexRef::new(t, i as u32),
                    msg: "projected feature".into(),
                });
            }
        }
        per_type.push(out);
    }
    let projected = Projected { per_type };
    ledger.alloc(BufferRole::ProjectedFeatures, projected.byte_len());
    Ok(projected)
}

/// Unnormalized edge score: `1` for rgcn-like,
/// `leaky_relu(a_r . [h'_u || h'_v])` for rgat-like.
pub fn compute_edge_weight(h_u: &[f32], h_v: &[f32], slot: usize, model: &Model) -> f32 {
    match model.variant() {
        Variant::RgcnLike => 1.0,
        Variant::RgatLike => {
            let a = model.attention(slot);
            let (a_u, a_v) = a.split_at(h_u.len());
            let s = dot(a_u, h_u) + dot(a_v, h_v);
            leaky_relu(s, model.config().attention_slope)
        }
    }
}

#[inline]
fn dot(a: &[f32], b: &[f32]) -> f32 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Normalized coefficients over `[target, n_1, ..., n_k]` for one relation.
///
/// rgcn-like uses `1 / (1 + k)` each; rgat-like is a softmax over the edge
/// scores with the target participating through its self score.
pub fn aggregation_coefficients<'a>(
    model: &Model,
    slot: usize,
    h_v: &[f32],
    neighbors: impl Iterator<Item = &'a [f32]>,
    out: &mut Vec<f32>,
) {
    out.clear();
    out.push(compute_edge_weight(h_v, h_v, slot, model));
    for h_u in neighbors {
        out.push(compute_edge_weight(h_u, h_v, slot, model));
    }
    match model.variant() {
        Variant::RgcnLike => {
            let inv = 1.0 / out.len() as f32;
            out.iter_mut().for_each(|c| *c = inv);
        }
        Variant::RgatLike => {
            let max = out.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            let mut sum = 0.0f32;
            for c in out.iter_mut() {
                *c = (*c - max).exp();
                sum += *c;
            }
            out.iter_mut().for_each(|c| *c /= sum);
        }
    }
}

/// `h_v^r` for one relation: self-initialized, then neighbors in list order.
fn aggregate_relation(
    model: &Model,
    projected: &Projected,
    semantic: &SemanticGraphSet,
    slot: usize,
    v: u32,
    coeff: &mut Vec<f32>,
    out: &mut [f32],
) {
    let sg = semantic.graph(slot);
    let h_v = projected.row(VertexRef::new(semantic.target_type(), v));
    let nbrs = sg.neighbors(v);
    let rows = nbrs.iter().map(|&u| projected.row(VertexRef::new(sg.src_type, u)));
    match model.variant() {
        Variant::RgcnLike => {
            out.copy_from_slice(h_v);
            for h_u in rows {
                for (o, x) in out.iter_mut().zip(h_u) {
                    *o += x;
                }
            }
            let n = (1 + nbrs.len()) as f32;
            out.iter_mut().for_each(|o| *o /= n);
        }
        Variant::RgatLike => {
            aggregation_coefficients(model, slot, h_v, rows.clone(), coeff);
            for (o, x) in out.iter_mut().zip(h_v) {
                *o = coeff[0] * x;
            }
            for (c, h_u) in coeff[1..].iter().zip(rows) {
                for (o, x) in out.iter_mut().zip(h_u) {
                    *o += c * x;
                }
            }
        }
    }
}

/// `z_v = sigma(sum_r beta_r h_v^r)` accumulated in relation-slot order.
fn semantic_fuse<'a>(model: &Model, per_relation: impl Iterator<Item = &'a [f32]>, out: &mut [f32]) {
    out.iter_mut().for_each(|o| *o = 0.0);
    for (slot, h) in per_relation.enumerate() {
        let beta = model.fusion_weight(slot);
        for (o, x) in out.iter_mut().zip(h) {
            *o += beta * x;
        }
    }
    let act = model.config().activation;
    out.iter_mut().for_each(|o| *o = act.apply(*o));
}

fn check_inputs(semantic: &SemanticGraphSet, model: &Model) -> Result<()> {
    if semantic.num_relations() == 0 {
        return Err(Error::EmptySet("no semantics to aggregate".into()));
    }
    if model.num_relations() != semantic.num_relations() {
        return Err(Error::Validation(format!(
            "model has {} relation slots, semantic set has {}",
            model.num_relations(),
            semantic.num_relations()
        )));
    }
    Ok(())
}

fn check_row(row: &[f32], v: VertexRef) -> Result<()> {
    if row.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric {
            vertex: v,
            msg: "embedding".into(),
        });
    }
    Ok(())
}

/// Per-semantic baseline: aggregate every target under one relation at a
/// time, materialize all per-relation intermediates, then fuse.
pub fn run_per_semantic(
    g: &HetGraph,
    semantic: &SemanticGraphSet,
    features: &FeatureStore,
    model: &Model,
) -> Result<RunOutput> {
    check_inputs(semantic, model)?;
    let mut ledger = IntermediateLedger::new();
    let mut projection_trace = AccessTrace::new();
    let projected = feature_projection(g, features, model, &mut ledger, &mut projection_trace)?;

    let d = model.d_hid();
    let n = semantic.num_targets();
    let target = semantic.target_type();
    let mut embeddings = Matrix::zeros(n as usize, d);
    ledger.alloc(BufferRole::Embeddings, embeddings.byte_len());

    let mut trace = AccessTrace::new();
    let mut coeff = Vec::new();
    let mut intermediates = Vec::with_capacity(semantic.num_relations());
    for (slot, sg) in semantic.graphs().iter().enumerate() {
        let mut inter = Matrix::zeros(n as usize, d);
        ledger.alloc(BufferRole::NaIntermediate, inter.byte_len());
        for v in 0..n {
            let nbrs = sg.neighbors(v);
            if nbrs.is_empty() {
                continue;
            }
            trace.push(VertexRef::new(target, v), ReadRole::Target, Some(sg.relation), Stage::Na);
            for &u in nbrs {
                trace.push(VertexRef::new(sg.src_type, u), ReadRole::Neighbor, Some(sg.relation), Stage::Na);
            }
            aggregate_relation(model, &projected, semantic, slot, v, &mut coeff, inter.row_mut(v as usize));
        }
        intermediates.push(inter);
    }

    for v in 0..n {
        let vref = VertexRef::new(target, v);
        let h_v = projected.row(vref);
        // empty neighborhoods fall back to h'_v, read once at fusion
        if semantic.active_relations(v) < semantic.num_relations() {
            trace.push(vref, ReadRole::Target, None, Stage::Sf);
        }
        let rows = semantic.graphs().iter().zip(&intermediates).map(|(sg, inter)| {
            if sg.neighbors(v).is_empty() {
                h_v
            } else {
                inter.row(v as usize)
            }
        });
        semantic_fuse(model, rows, embeddings.row_mut(v as usize));
        check_row(embeddings.row(v as usize), vref)?;
    }
    let inter_bytes: u64 = intermediates.iter().map(Matrix::byte_len).sum();
    ledger.free(BufferRole::NaIntermediate, inter_bytes)?;
    ledger.free_all();

    Ok(RunOutput {
        embeddings,
        projected,
        ledger,
        trace,
        projection_trace,
    })
}

/// Semantics-complete paradigm: each target's neighbors across all relations
/// form one workload, fused immediately; per-vertex intermediates are freed
/// right after fusion.
pub fn run_semantics_complete(
    g: &HetGraph,
    semantic: &SemanticGraphSet,
    features: &FeatureStore,
    model: &Model,
    vertex_order: &[u32],
) -> Result<RunOutput> {
    check_inputs(semantic, model)?;
    check_permutation(vertex_order, semantic.num_targets())?;
    let mut ledger = IntermediateLedger::new();
    let mut projection_trace = AccessTrace::new();
    let projected = feature_projection(g, features, model, &mut ledger, &mut projection_trace)?;

    let d = model.d_hid();
    let n = semantic.num_targets();
    let nrel = semantic.num_relations();
    let target = semantic.target_type();
    let mut embeddings = Matrix::zeros(n as usize, d);
    ledger.alloc(BufferRole::Embeddings, embeddings.byte_len());

    let mut trace = AccessTrace::new();
    let mut coeff = Vec::new();
    let mut local = Matrix::zeros(nrel, d);
    let slot_bytes = (d * 4) as u64;
    for &v in vertex_order {
        let vref = VertexRef::new(target, v);
        trace.push(vref, ReadRole::Target, None, Stage::Na);
        for (slot, sg) in semantic.graphs().iter().enumerate() {
            ledger.alloc(BufferRole::NaIntermediate, slot_bytes);
            for &u in sg.neighbors(v) {
                trace.push(VertexRef::new(sg.src_type, u), ReadRole::Neighbor, Some(sg.relation), Stage::Na);
            }
            aggregate_relation(model, &projected, semantic, slot, v, &mut coeff, local.row_mut(slot));
        }
        semantic_fuse(model, (0..nrel).map(|s| local.row(s)), embeddings.row_mut(v as usize));
        check_row(embeddings.row(v as usize), vref)?;
        ledger.free(BufferRole::NaIntermediate, slot_bytes * nrel as u64)?;
    }
    ledger.free_all();

    Ok(RunOutput {
        embeddings,
        projected,
        ledger,
        trace,
        projection_trace,
    })
}

pub(crate) fn check_permutation(order: &[u32], n: u32) -> Result<()> {
    if order.len() != n as usize {
        return Err(Error::Validation(format!(
            "vertex order has {} entries for {n} targets",
            order.len()
        )));
    }
    let mut seen = vec![false; n as usize];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v as usize], true) {
            return Err(Error::Validation(format!("vertex order is not a permutation (at {v})")));
        }
    }
    Ok(())
}
