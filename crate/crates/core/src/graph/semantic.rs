//! Semantic graph build: per-relation neighbor lists for the target type.

use super::{Adjacency, EdgeTypeId, HetGraph, VertexRef, VertexTypeId};
use crate::error::{Error, Result};

/// One relation's bipartite view: `neighbors(v)` is `N_v^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticGraph {
    pub relation: EdgeTypeId,
    pub src_type: VertexTypeId,
    adjacency: Adjacency,
}

impl SemanticGraph {
    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        self.adjacency.neighbors(v)
    }

    pub fn num_edges(&self) -> usize {
        self.adjacency.num_edges()
    }
}

/// Semantic graphs for every relation terminating at the target type.
///
/// Relations whose destination is another type are excluded; reversed edges
/// are not synthesized.
#[derive(Debug, Clone, PartialEq)]
pub struct SemanticGraphSet {
    target: VertexTypeId,
    num_targets: u32,
    graphs: Vec<SemanticGraph>,
}

impl SemanticGraphSet {
    pub fn target_type(&self) -> VertexTypeId {
        self.target
    }

    pub fn num_targets(&self) -> u32 {
        self.num_targets
    }

    pub fn num_relations(&self) -> usize {
        self.graphs.len()
    }

    pub fn graphs(&self) -> &[SemanticGraph] {
        &self.graphs
    }

    pub fn graph(&self, slot: usize) -> &SemanticGraph {
        &self.graphs[slot]
    }

    pub fn num_edges(&self) -> u64 {
        self.graphs.iter().map(|g| g.num_edges() as u64).sum()
    }

    /// Number of relations with a non-empty neighborhood at `v`.
    pub fn active_relations(&self, v: u32) -> usize {
        self.graphs.iter().filter(|g| !g.neighbors(v).is_empty()).count()
    }

    /// Cross-semantic neighborhood `{v} ∪ ⋃_r N_v^r`, sorted and duplicate-free.
    pub fn super_neighborhood(&self, v: u32) -> Vec<VertexRef> {
        let mut out = Vec::with_capacity(1 + self.graphs.iter().map(|g| g.neighbors(v).len()).sum::<usize>());
        out.push(VertexRef::new(self.target, v));
        for g in &self.graphs {
            out.extend(g.neighbors(v).iter().map(|&u| VertexRef::new(g.src_type, u)));
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

pub fn build_semantic_graphs(g: &HetGraph, target_type: VertexTypeId) -> Result<SemanticGraphSet> {
    if target_type.0 as usize >= g.vertex_types().len() {
        return Err(Error::Validation(format!("target type {} does not exist", target_type.0)));
    }
    let graphs: Vec<SemanticGraph> = g
        .relation_ids()
        .filter(|&r| g.relation(r).dst == target_type)
        .map(|r| SemanticGraph {
            relation: r,
            src_type: g.relation(r).src,
            adjacency: g.adjacency(r).clone(),
        })
        .collect();
    if graphs.is_empty() {
        return Err(Error::EmptySet(format!(
            "no relation terminates at vertex type {}",
            g.vertex_type(target_type).name
        )));
    }
    Ok(SemanticGraphSet {
        target: target_type,
        num_targets: g.vertex_type(target_type).count,
        graphs,
    })
}
