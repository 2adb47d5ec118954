use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::graph::{SemanticGraphSet, VertexRef};

/// A target vertex together with its cross-semantic neighborhood (itself
/// included), treated as one indivisible aggregation workload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperVertex {
    pub target: u32,
    /// Sorted, duplicate-free.
    pub neighborhood: Vec<VertexRef>,
}

impl SuperVertex {
    pub fn from_semantic(sem: &SemanticGraphSet, target: u32) -> Self {
        Self {
            target,
            neighborhood: sem.super_neighborhood(target),
        }
    }

    pub fn workload(&self) -> usize {
        self.neighborhood.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergraphConfig {
    /// Fraction of targets (by workload size) modeled as super vertices.
    pub delta: f64,
    /// Upper bound on candidate partners examined per super vertex.
    pub candidate_cap: Option<usize>,
}

impl Default for HypergraphConfig {
    fn default() -> Self {
        Self {
            delta: 0.15,
            candidate_cap: None,
        }
    }
}

/// Weighted overlap graph over super vertices; weights are exact Jaccard
/// similarities of their neighborhoods.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapHypergraph {
    targets: Vec<u32>,
    workloads: Vec<usize>,
    /// Per vertex, `(other, weight)` sorted by `other`.
    adj: Vec<Vec<(u32, f64)>>,
    degree: Vec<f64>,
    total_weight: f64,
    index: HashMap<u32, u32>,
}

impl OverlapHypergraph {
    /// Builds a hypergraph directly from an edge list over `0..n`; vertex `i`
    /// stands for target `i`. Duplicate pairs and self-edges are rejected.
    pub fn from_edges(n: usize, edges: &[(u32, u32, f64)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(i, j, w) in edges {
            if i == j || i as usize >= n || j as usize >= n {
                return Err(Error::Validation(format!("bad hypergraph edge ({i}, {j})")));
            }
            if !(w > 0.0 && w <= 1.0) {
                return Err(Error::Validation(format!("edge weight {w} outside (0, 1]")));
            }
            adj[i as usize].push((j, w));
            adj[j as usize].push((i, w));
        }
        for list in &mut adj {
            list.sort_by_key(|e| e.0);
            if list.windows(2).any(|p| p[0].0 == p[1].0) {
                return Err(Error::Validation("duplicate hypergraph edge".into()));
            }
        }
        let targets: Vec<u32> = (0..n as u32).collect();
        Ok(Self::assemble(targets, vec![0; n], adj, edges.iter().map(|e| e.2)))
    }

    fn assemble(targets: Vec<u32>, workloads: Vec<usize>, adj: Vec<Vec<(u32, f64)>>, weights: impl Iterator<Item = f64>) -> Self {
        let degree = adj.iter().map(|l| l.iter().map(|e| e.1).sum()).collect();
        let index = targets.iter().enumerate().map(|(i, &t)| (t, i as u32)).collect();
        Self {
            targets,
            workloads,
            adj,
            degree,
            total_weight: weights.sum(),
            index,
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.targets.len()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Target id of hypergraph vertex `i`.
    pub fn target(&self, i: usize) -> u32 {
        self.targets[i]
    }

    pub fn targets(&self) -> &[u32] {
        &self.targets
    }

    pub fn workload(&self, i: usize) -> usize {
        self.workloads[i]
    }

    pub fn index_of(&self, target: u32) -> Option<usize> {
        self.index.get(&target).map(|&i| i as usize)
    }

    pub fn neighbors(&self, i: usize) -> &[(u32, f64)] {
        &self.adj[i]
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adj[i]
            .binary_search_by_key(&(j as u32), |e| e.0)
            .map(|p| self.adj[i][p].1)
            .unwrap_or(0.0)
    }

    /// Weighted degree `k_i`.
    pub fn degree(&self, i: usize) -> f64 {
        self.degree[i]
    }

    /// Sum of edge weights `m`.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    /// Edges with `i < j`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, l)| l.iter().filter(move |e| e.0 as usize > i).map(move |e| (i as u32, e.0, e.1)))
    }

    /// CSV `i,j,w` with target ids.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "i,j,w")?;
        for (i, j, wt) in self.edges() {
            writeln!(w, "{},{},{wt}", self.targets[i as usize], self.targets[j as usize])?;
        }
        Ok(())
    }
}

pub fn jaccard(a: &[VertexRef], b: &[VertexRef]) -> f64 {
    let (mut i, mut j, mut inter) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

/// Pairwise intersection sizes for sorted sets, found through an inverted
/// index so only co-occurring pairs are visited. Calls `emit(i, j, |Si ∩ Sj|)`
/// for `i < j` in ascending `(i, j)` order.
pub(crate) fn for_each_overlapping_pair(
    sets: &[&[VertexRef]],
    candidate_cap: Option<usize>,
    mut emit: impl FnMut(usize, usize, usize),
) {
    let mut postings: HashMap<VertexRef, Vec<u32>> = HashMap::new();
    for (i, s) in sets.iter().enumerate() {
        for &x in s.iter() {
            postings.entry(x).or_default().push(i as u32);
        }
    }
    let mut count = vec![0u32; sets.len()];
    let mut touched = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        for x in s.iter() {
            // postings are ascending; only partners after `i` are needed
            let list = &postings[x];
            let start = list.partition_point(|&j| j as usize <= i);
            for &j in &list[start..] {
                if count[j as usize] == 0 {
                    touched.push(j);
                }
                count[j as usize] += 1;
            }
        }
        touched.sort_unstable();
        let take = candidate_cap.unwrap_or(usize::MAX).min(touched.len());
        for &j in &touched[..take] {
            emit(i, j as usize, count[j as usize] as usize);
        }
        for &j in &touched {
            count[j as usize] = 0;
        }
        touched.clear();
    }
}

/// Selects the `ceil(delta * n)` targets with the largest neighborhoods
/// (ties to the lower id) and connects every pair that shares a neighbor.
pub fn build_hypergraph(sem: &SemanticGraphSet, cfg: &HypergraphConfig) -> Result<OverlapHypergraph> {
    if !(cfg.delta > 0.0 && cfg.delta <= 1.0) {
        return Err(Error::Config(format!("delta must be in (0, 1], got {}", cfg.delta)));
    }
    let n = sem.num_targets();
    let keep = ((cfg.delta * n as f64).ceil() as usize).min(n as usize);
    let mut all: Vec<SuperVertex> = (0..n).map(|v| SuperVertex::from_semantic(sem, v)).collect();
    let mut order: Vec<u32> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(all[v as usize].workload()), v));
    let mut chosen: Vec<u32> = order[..keep].to_vec();
    chosen.sort_unstable();
    let supers: Vec<SuperVertex> = chosen
        .iter()
        .map(|&v| std::mem::replace(&mut all[v as usize], SuperVertex { target: v, neighborhood: Vec::new() }))
        .collect();
    drop(all);
    Ok(hypergraph_from_super_vertices(supers, cfg.candidate_cap))
}

pub fn hypergraph_from_super_vertices(supers: Vec<SuperVertex>, candidate_cap: Option<usize>) -> OverlapHypergraph {
    let sets: Vec<&[VertexRef]> = supers.iter().map(|s| s.neighborhood.as_slice()).collect();
    let mut adj = vec![Vec::new(); supers.len()];
    let mut weights = Vec::new();
    for_each_overlapping_pair(&sets, candidate_cap, |i, j, inter| {
        let w = inter as f64 / (sets[i].len() + sets[j].len() - inter) as f64;
        adj[i].push((j as u32, w));
        adj[j].push((i as u32, w));
        weights.push(w);
    });
    for l in &mut adj {
        l.sort_by_key(|e| e.0);
    }
    let targets = supers.iter().map(|s| s.target).collect();
    let workloads = supers.iter().map(SuperVertex::workload).collect();
    OverlapHypergraph::assemble(targets, workloads, adj, weights.into_iter())
}

/// Louvain gain of inserting an isolated vertex into a community:
/// `k_in / m - sigma_tot * k_v / (2 m^2)`; zero when the graph has no edges.
#[inline]
pub fn louvain_gain(k_in: f64, sigma_tot: f64, k_v: f64, m: f64) -> f64 {
    if m == 0.0 {
        return 0.0;
    }
    k_in / m - sigma_tot * k_v / (2.0 * m * m)
}

/// Members of a group under construction plus the Louvain bookkeeping.
#[derive(Debug, Clone, Default)]
pub struct Community {
    members: Vec<u32>,
    sigma_tot: f64,
}

impl Community {
    pub fn new(h: &OverlapHypergraph, seed: usize) -> Self {
        Self {
            members: vec![seed as u32],
            sigma_tot: h.degree(seed),
        }
    }

    pub fn insert(&mut self, h: &OverlapHypergraph, v: usize) {
        self.members.push(v as u32);
        self.sigma_tot += h.degree(v);
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn sigma_tot(&self) -> f64 {
        self.sigma_tot
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&(v as u32))
    }
}

pub fn modularity_gain(h: &OverlapHypergraph, v: usize, community: &Community) -> f64 {
    let k_in: f64 = h
        .neighbors(v)
        .iter()
        .filter(|e| community.contains(e.0 as usize))
        .map(|e| e.1)
        .sum();
    louvain_gain(k_in, community.sigma_tot(), h.degree(v), h.total_weight())
}
