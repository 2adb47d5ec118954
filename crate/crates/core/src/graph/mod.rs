//! Heterogeneous graph model.
//!
//! Vertices are addressed as `(vertex type, local id)` with dense local ids per
//! type. Edges are stored per relation in a compressed adjacency keyed by the
//! destination vertex, so a row lists the sources that feed a vertex under that
//! relation. Duplicate edges are collapsed at build time.

mod binary;
mod semantic;
pub mod synth;
mod text;

use std::fmt;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use binary::{read_binary, write_binary};
pub use semantic::{build_semantic_graphs, SemanticGraph, SemanticGraphSet};
pub use synth::{generate_synthetic, PowerLaw, SyntheticRelation, SyntheticSpec};
pub use text::{parse_text, write_text};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexTypeId(pub u16);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeTypeId(pub u16);

/// Globally addressed vertex: `(type, local id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexRef {
    pub vtype: VertexTypeId,
    pub id: u32,
}

impl VertexRef {
    pub fn new(vtype: VertexTypeId, id: u32) -> Self {
        Self { vtype, id }
    }
}

impl fmt::Display for VertexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.vtype.0, self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexType {
    pub name: String,
    pub count: u32,
    pub feature_dim: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub src: VertexTypeId,
    pub dst: VertexTypeId,
}

/// Compressed adjacency keyed by destination vertex.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Adjacency {
    offsets: Vec<u32>,
    sources: Vec<u32>,
}

impl Adjacency {
    /// Builds from `(src, dst)` pairs; pairs are sorted and deduplicated.
    fn from_edges(num_dst: u32, mut edges: Vec<(u32, u32)>) -> Self {
        edges.sort_unstable_by_key(|&(s, d)| (d, s));
        edges.dedup();
        let mut offsets = vec![0u32; num_dst as usize + 1];
        for &(_, d) in &edges {
            offsets[d as usize + 1] += 1;
        }
        for i in 0..num_dst as usize {
            offsets[i + 1] += offsets[i];
        }
        let sources = edges.into_iter().map(|(s, _)| s).collect();
        Self { offsets, sources }
    }

    pub(crate) fn from_parts(offsets: Vec<u32>, sources: Vec<u32>) -> Result<Self> {
        let adj = Self { offsets, sources };
        adj.check_shape()?;
        Ok(adj)
    }

    fn check_shape(&self) -> Result<()> {
        if self.offsets.first() != Some(&0) {
            return Err(Error::Validation("adjacency offsets must start at 0".into()));
        }
        if self.offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Validation("adjacency offsets not monotone".into()));
        }
        if *self.offsets.last().unwrap() as usize != self.sources.len() {
            return Err(Error::Validation("adjacency offsets/sources length mismatch".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn neighbors(&self, dst: u32) -> &[u32] {
        let lo = self.offsets[dst as usize] as usize;
        let hi = self.offsets[dst as usize + 1] as usize;
        &self.sources[lo..hi]
    }

    pub fn num_rows(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_edges(&self) -> usize {
        self.sources.len()
    }

    pub fn offsets(&self) -> &[u32] {
        &self.offsets
    }

    pub fn sources(&self) -> &[u32] {
        &self.sources
    }

    /// Bytes of the compressed representation (u32 offsets and ids).
    pub fn byte_len(&self) -> u64 {
        ((self.offsets.len() + self.sources.len()) * 4) as u64
    }

    /// Iterates `(src, dst)` pairs in destination-major order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.num_rows() as u32).flat_map(move |d| self.neighbors(d).iter().map(move |&s| (s, d)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HetGraph {
    vertex_types: Vec<VertexType>,
    relations: Vec<Relation>,
    adjacency: Vec<Adjacency>,
    target: VertexTypeId,
}

impl HetGraph {
    pub fn vertex_types(&self) -> &[VertexType] {
        &self.vertex_types
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn vertex_type(&self, t: VertexTypeId) -> &VertexType {
        &self.vertex_types[t.0 as usize]
    }

    pub fn relation(&self, r: EdgeTypeId) -> &Relation {
        &self.relations[r.0 as usize]
    }

    pub fn adjacency(&self, r: EdgeTypeId) -> &Adjacency {
        &self.adjacency[r.0 as usize]
    }

    pub fn target_type(&self) -> VertexTypeId {
        self.target
    }

    pub fn vertex_type_by_name(&self, name: &str) -> Option<VertexTypeId> {
        self.vertex_types
            .iter()
            .position(|t| t.name == name)
            .map(|i| VertexTypeId(i as u16))
    }

    pub fn relation_by_name(&self, name: &str) -> Option<EdgeTypeId> {
        self.relations
            .iter()
            .position(|r| r.name == name)
            .map(|i| EdgeTypeId(i as u16))
    }

    pub fn num_vertices(&self) -> u64 {
        self.vertex_types.iter().map(|t| t.count as u64).sum()
    }

    pub fn num_edges(&self) -> u64 {
        self.adjacency.iter().map(|a| a.num_edges() as u64).sum()
    }

    /// Heterogeneous when `|vertex types| + |edge types| > 2`.
    pub fn is_heterogeneous(&self) -> bool {
        self.vertex_types.len() + self.relations.len() > 2
    }

    pub fn adjacency_bytes(&self) -> u64 {
        self.adjacency.iter().map(Adjacency::byte_len).sum()
    }

    /// Iterates every vertex type by id.
    pub fn type_ids(&self) -> impl Iterator<Item = VertexTypeId> {
        (0..self.vertex_types.len() as u16).map(VertexTypeId)
    }

    pub fn relation_ids(&self) -> impl Iterator<Item = EdgeTypeId> {
        (0..self.relations.len() as u16).map(EdgeTypeId)
    }

    fn validate(&self) -> Result<()> {
        if self.target.0 as usize >= self.vertex_types.len() {
            return Err(Error::Validation("target type out of range".into()));
        }
        for (ri, (rel, adj)) in self.relations.iter().zip(&self.adjacency).enumerate() {
            let ntypes = self.vertex_types.len();
            if rel.src.0 as usize >= ntypes || rel.dst.0 as usize >= ntypes {
                return Err(Error::Validation(format!(
                    "relation {} references an undeclared vertex type",
                    rel.name
                )));
            }
            adj.check_shape()?;
            let dst_count = self.vertex_type(rel.dst).count as usize;
            let src_count = self.vertex_type(rel.src).count;
            if adj.num_rows() != dst_count {
                return Err(Error::Validation(format!(
                    "relation {ri}: adjacency has {} rows, destination type has {dst_count} vertices",
                    adj.num_rows()
                )));
            }
            for d in 0..dst_count as u32 {
                let row = adj.neighbors(d);
                if row.iter().any(|&s| s >= src_count) {
                    return Err(Error::Validation(format!(
                        "relation {}: source id out of range in row {d}",
                        rel.name
                    )));
                }
                if row.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::Validation(format!(
                        "relation {}: row {d} not sorted/deduplicated",
                        rel.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// SHA-256 over the canonical binary encoding of graph and features.
    pub fn fingerprint(&self, features: &FeatureStore) -> String {
        let mut buf = Vec::new();
        write_binary(self, features, &mut buf).expect("in-memory write");
        hex::encode(Sha256::digest(&buf))
    }
}

/// Incremental construction with validation; edges are deduplicated in [`build`](Self::build).
#[derive(Debug, Default)]
pub struct HetGraphBuilder {
    vertex_types: Vec<VertexType>,
    relations: Vec<Relation>,
    edges: Vec<Vec<(u32, u32)>>,
    target: Option<VertexTypeId>,
}

impl HetGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex_type(&mut self, name: &str, count: u32, feature_dim: usize) -> Result<VertexTypeId> {
        if self.vertex_types.iter().any(|t| t.name == name) {
            return Err(Error::Validation(format!("duplicate vertex type {name}")));
        }
        if self.vertex_types.len() >= u16::MAX as usize {
            return Err(Error::Validation("too many vertex types".into()));
        }
        self.vertex_types.push(VertexType {
            name: name.to_string(),
            count,
            feature_dim,
        });
        Ok(VertexTypeId(self.vertex_types.len() as u16 - 1))
    }

    pub fn add_relation(&mut self, name: &str, src: VertexTypeId, dst: VertexTypeId) -> Result<EdgeTypeId> {
        if self.relations.iter().any(|r| r.name == name) {
            return Err(Error::Validation(format!("duplicate relation {name}")));
        }
        let n = self.vertex_types.len();
        if src.0 as usize >= n || dst.0 as usize >= n {
            return Err(Error::Validation(format!(
                "relation {name} references an undeclared vertex type"
            )));
        }
        self.relations.push(Relation {
            name: name.to_string(),
            src,
            dst,
        });
        self.edges.push(Vec::new());
        Ok(EdgeTypeId(self.relations.len() as u16 - 1))
    }

    pub fn set_target(&mut self, t: VertexTypeId) -> Result<()> {
        if t.0 as usize >= self.vertex_types.len() {
            return Err(Error::Validation("target type not declared".into()));
        }
        self.target = Some(t);
        Ok(())
    }

    pub fn vertex_type_by_name(&self, name: &str) -> Option<VertexTypeId> {
        self.vertex_types
            .iter()
            .position(|t| t.name == name)
            .map(|i| VertexTypeId(i as u16))
    }

    pub fn relation_by_name(&self, name: &str) -> Option<EdgeTypeId> {
        self.relations
            .iter()
            .position(|r| r.name == name)
            .map(|i| EdgeTypeId(i as u16))
    }

    pub fn relation(&self, r: EdgeTypeId) -> &Relation {
        &self.relations[r.0 as usize]
    }

    pub fn vertex_types(&self) -> &[VertexType] {
        &self.vertex_types
    }

    pub fn add_edge(&mut self, r: EdgeTypeId, src: u32, dst: u32) -> Result<()> {
        let rel = self
            .relations
            .get(r.0 as usize)
            .ok_or_else(|| Error::Validation(format!("undeclared relation {}", r.0)))?;
        let src_count = self.vertex_types[rel.src.0 as usize].count;
        let dst_count = self.vertex_types[rel.dst.0 as usize].count;
        if src >= src_count {
            return Err(Error::Validation(format!(
                "relation {}: source id {src} >= {} vertex count {src_count}",
                rel.name, self.vertex_types[rel.src.0 as usize].name
            )));
        }
        if dst >= dst_count {
            return Err(Error::Validation(format!(
                "relation {}: destination id {dst} >= {} vertex count {dst_count}",
                rel.name, self.vertex_types[rel.dst.0 as usize].name
            )));
        }
        self.edges[r.0 as usize].push((src, dst));
        Ok(())
    }

    pub fn build(self) -> Result<HetGraph> {
        if self.vertex_types.is_empty() {
            return Err(Error::Validation("graph declares no vertex types".into()));
        }
        let target = self.target.unwrap_or(VertexTypeId(0));
        let adjacency = self
            .relations
            .iter()
            .zip(self.edges)
            .map(|(rel, edges)| Adjacency::from_edges(self.vertex_types[rel.dst.0 as usize].count, edges))
            .collect();
        let g = HetGraph {
            vertex_types: self.vertex_types,
            relations: self.relations,
            adjacency,
            target,
        };
        g.validate()?;
        Ok(g)
    }

    pub(crate) fn build_from_adjacency(
        vertex_types: Vec<VertexType>,
        relations: Vec<Relation>,
        adjacency: Vec<Adjacency>,
        target: VertexTypeId,
    ) -> Result<HetGraph> {
        if relations.len() != adjacency.len() {
            return Err(Error::Validation("relation/adjacency count mismatch".into()));
        }
        let g = HetGraph {
            vertex_types,
            relations,
            adjacency,
            target,
        };
        g.validate()?;
        Ok(g)
    }
}

/// Raw per-type feature matrices (`count x feature_dim`, `f32`).
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureStore {
    raw: Vec<Matrix>,
}

/// Seed of the fixed stream used for vertices without explicit features.
pub const DEFAULT_FEATURE_SEED: u64 = 0x5EED_FEA7;

impl FeatureStore {
    pub fn new(graph: &HetGraph, raw: Vec<Matrix>) -> Result<Self> {
        let store = Self { raw };
        store.validate(graph)?;
        Ok(store)
    }

    /// Deterministic pseudo-random features in `[-1, 1)`, one stream per vertex type.
    pub fn pseudo_random(graph: &HetGraph) -> Self {
        Self {
            raw: graph
                .vertex_types()
                .iter()
                .enumerate()
                .map(|(i, t)| pseudo_random_matrix(t.count as usize, t.feature_dim, DEFAULT_FEATURE_SEED ^ i as u64))
                .collect(),
        }
    }

    pub fn raw(&self, t: VertexTypeId) -> &Matrix {
        &self.raw[t.0 as usize]
    }

    pub fn raw_mut(&mut self, t: VertexTypeId) -> &mut Matrix {
        &mut self.raw[t.0 as usize]
    }

    pub fn row(&self, v: VertexRef) -> &[f32] {
        self.raw[v.vtype.0 as usize].row(v.id as usize)
    }

    pub fn byte_len(&self) -> u64 {
        self.raw.iter().map(Matrix::byte_len).sum()
    }

    pub fn validate(&self, graph: &HetGraph) -> Result<()> {
        if self.raw.len() != graph.vertex_types().len() {
            return Err(Error::Validation("feature store type count mismatch".into()));
        }
        for (t, m) in graph.vertex_types().iter().zip(&self.raw) {
            if m.rows() != t.count as usize || m.cols() != t.feature_dim {
                return Err(Error::Validation(format!(
                    "features for {} are {}x{}, expected {}x{}",
                    t.name,
                    m.rows(),
                    m.cols(),
                    t.count,
                    t.feature_dim
                )));
            }
            if !m.is_finite() {
                return Err(Error::Validation(format!("non-finite feature for type {}", t.name)));
            }
        }
        Ok(())
    }
}

pub(crate) fn pseudo_random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    Matrix::from_vec(rows, cols, data).expect("shape by construction")
}

/// Graph file encodings accepted by [`load_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphFormat {
    EdgeListText,
    Binary,
}

impl GraphFormat {
    /// `.bin`/`.hgb` → binary, anything else → text.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("hgb") => GraphFormat::Binary,
            _ => GraphFormat::EdgeListText,
        }
    }
}

pub fn load_graph(path: &std::path::Path, format: GraphFormat) -> Result<(HetGraph, FeatureStore)> {
    match format {
        GraphFormat::EdgeListText => {
            let text = std::fs::read_to_string(path)?;
            parse_text(&text)
        }
        GraphFormat::Binary => {
            let f = std::fs::File::open(path)?;
            read_binary(std::io::BufReader::new(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> HetGraphBuilder {
        let mut b = HetGraphBuilder::new();
        let a = b.add_vertex_type("A", 3, 2).unwrap();
        let p = b.add_vertex_type("P", 2, 2).unwrap();
        b.add_relation("AP", a, p).unwrap();
        b.set_target(p).unwrap();
        b
    }

    #[test]
    fn duplicate_edges_collapse() {
        let mut b = small();
        let r = EdgeTypeId(0);
        b.add_edge(r, 0, 1).unwrap();
        b.add_edge(r, 0, 1).unwrap();
        b.add_edge(r, 2, 1).unwrap();
        let g = b.build().unwrap();
        assert_eq!(g.adjacency(r).neighbors(1), &[0, 2]);
        assert_eq!(g.adjacency(r).neighbors(0), &[] as &[u32]);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn out_of_range_edge_is_rejected() {
        let mut b = small();
        assert!(matches!(b.add_edge(EdgeTypeId(0), 3, 0), Err(Error::Validation(_))));
        assert!(matches!(b.add_edge(EdgeTypeId(0), 0, 2), Err(Error::Validation(_))));
    }

    #[test]
    fn heterogeneity_flag() {
        let g = small().build().unwrap();
        assert!(g.is_heterogeneous());
        let mut b = HetGraphBuilder::new();
        b.add_vertex_type("V", 4, 1).unwrap();
        let g = b.build().unwrap();
        assert!(!g.is_heterogeneous());
    }

    #[test]
    fn edges_iterate_destination_major() {
        let mut b = small();
        b.add_edge(EdgeTypeId(0), 1, 1).unwrap();
        b.add_edge(EdgeTypeId(0), 2, 0).unwrap();
        let g = b.build().unwrap();
        let e: Vec<_> = g.adjacency(EdgeTypeId(0)).edges().collect();
        assert_eq!(e, vec![(2, 0), (1, 1)]);
    }
}
