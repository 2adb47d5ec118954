//! Target-vertex grouping for multi-channel execution.
//!
//! High-workload targets are clustered on an overlap hypergraph with a
//! size-capped, single-level Louvain insertion loop; groups are released one
//! at a time so channels can start before grouping finishes. The remaining
//! targets are chunked sequentially.

mod hypergraph;

use std::collections::HashMap;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{SemanticGraphSet, VertexRef};

pub use hypergraph::{
    build_hypergraph, hypergraph_from_super_vertices, jaccard, louvain_gain, modularity_gain, Community,
    HypergraphConfig, OverlapHypergraph, SuperVertex,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupingStrategy {
    Sequential,
    Random,
    Overlap,
}

impl GroupingStrategy {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupingStrategy::Sequential => "sequential",
            GroupingStrategy::Random => "random",
            GroupingStrategy::Overlap => "overlap",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub members: Vec<u32>,
    pub release_index: usize,
    pub channel: usize,
}

/// One evaluation round of the grouper: the candidate frontier it scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingStep {
    /// Release index of the group being grown.
    pub group: usize,
    pub frontier: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupPlan {
    pub strategy: GroupingStrategy,
    pub num_targets: u32,
    pub n_channels: usize,
    pub n_max: usize,
    /// In release order.
    pub groups: Vec<Group>,
    /// Empty for the baselines.
    pub steps: Vec<GroupingStep>,
}

pub fn group_cap(num_targets: u32, n_channels: usize) -> usize {
    (num_targets as usize).div_ceil(n_channels).max(1)
}

fn check_channels(n_channels: usize) -> Result<()> {
    if n_channels == 0 {
        return Err(Error::Config("n_channels must be >= 1".into()));
    }
    Ok(())
}

impl GroupPlan {
    fn new(strategy: GroupingStrategy, num_targets: u32, n_channels: usize) -> Self {
        Self {
            strategy,
            num_targets,
            n_channels,
            n_max: group_cap(num_targets, n_channels),
            groups: Vec::new(),
            steps: Vec::new(),
        }
    }

    fn emit(&mut self, members: Vec<u32>) {
        let release_index = self.groups.len();
        self.groups.push(Group {
            members,
            release_index,
            channel: release_index % self.n_channels,
        });
    }

    fn emit_chunks(&mut self, ids: &[u32]) {
        for chunk in ids.chunks(self.n_max) {
            self.emit(chunk.to_vec());
        }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Checks the plan partitions `0..num_targets` into groups of at most
    /// `n_max`, released in order on valid channels.
    pub fn validate(&self, num_targets: u32) -> Result<()> {
        if num_targets != self.num_targets {
            return Err(Error::Validation(format!(
                "plan covers {} targets, graph has {num_targets}",
                self.num_targets
            )));
        }
        let mut seen = vec![false; num_targets as usize];
        for (i, g) in self.groups.iter().enumerate() {
            if g.release_index != i || g.channel >= self.n_channels {
                return Err(Error::Validation(format!("group {i} has bad release index or channel")));
            }
            if g.members.is_empty() || g.members.len() > self.n_max {
                return Err(Error::Validation(format!(
                    "group {i} has {} members (cap {})",
                    g.members.len(),
                    self.n_max
                )));
            }
            for &v in &g.members {
                match seen.get_mut(v as usize) {
                    Some(s) if !*s => *s = true,
                    Some(_) => return Err(Error::Validation(format!("target {v} assigned twice"))),
                    None => return Err(Error::Validation(format!("target {v} out of range"))),
                }
            }
        }
        if let Some(v) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!("target {v} not assigned")));
        }
        Ok(())
    }

    /// Flattened processing order (release order, members in group order).
    pub fn vertex_order(&self) -> Vec<u32> {
        self.groups.iter().flat_map(|g| g.members.iter().copied()).collect()
    }

    /// CSV `group_id,release_index,channel,member_ids...`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "group_id,release_index,channel,member_ids")?;
        for (id, g) in self.groups.iter().enumerate() {
            write!(w, "{id},{},{}", g.release_index, g.channel)?;
            for m in &g.members {
                write!(w, ",{m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

pub fn group_sequential(num_targets: u32, n_channels: usize) -> Result<GroupPlan> {
    check_channels(n_channels)?;
    let mut plan = GroupPlan::new(GroupingStrategy::Sequential, num_targets, n_channels);
    let ids: Vec<u32> = (0..num_targets).collect();
    plan.emit_chunks(&ids);
    Ok(plan)
}

pub fn group_random(num_targets: u32, n_channels: usize, seed: u64) -> Result<GroupPlan> {
    check_channels(n_channels)?;
    let mut plan = GroupPlan::new(GroupingStrategy::Random, num_targets, n_channels);
    let mut ids: Vec<u32> = (0..num_targets).collect();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    plan.emit_chunks(&ids);
    Ok(plan)
}

/// Streaming overlap-driven grouping over the hypergraph vertices, followed
/// by sequential chunks of the remaining targets.
pub fn group_overlap_driven(h: &OverlapHypergraph, num_targets: u32, n_channels: usize, seed: u64) -> Result<GroupPlan> {
    check_channels(n_channels)?;
    let mut plan = GroupPlan::new(GroupingStrategy::Overlap, num_targets, n_channels);
    let n = h.num_vertices();
    if h.targets().iter().any(|&t| t >= num_targets) {
        return Err(Error::Validation("hypergraph references a target outside the graph".into()));
    }

    let mut seed_order: Vec<u32> = (0..n as u32).collect();
    seed_order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut visited = vec![false; n];
    let m = h.total_weight();
    // frontier vertex -> weight into the current group
    let mut k_in: HashMap<u32, f64> = HashMap::new();

    for &s in &seed_order {
        if visited[s as usize] {
            continue;
        }
        visited[s as usize] = true;
        let mut group = Community::new(h, s as usize);
        k_in.clear();
        let add_edges = |v: usize, k_in: &mut HashMap<u32, f64>, visited: &[bool]| {
            for &(u, w) in h.neighbors(v) {
                if !visited[u as usize] {
                    *k_in.entry(u).or_insert(0.0) += w;
                }
            }
        };
        add_edges(s as usize, &mut k_in, &visited);

        while group.len() < plan.n_max {
            plan.steps.push(GroupingStep {
                group: plan.groups.len(),
                frontier: k_in.len() as u32,
            });
            let mut best: Option<(f64, u32)> = None;
            for (&v, &kin) in &k_in {
                let gain = louvain_gain(kin, group.sigma_tot(), h.degree(v as usize), m);
                if gain <= 0.0 {
                    continue;
                }
                best = match best {
                    Some((g, b)) if g > gain || (g == gain && b < v) => Some((g, b)),
                    _ => Some((gain, v)),
                };
            }
            let Some((_, v)) = best else { break };
            visited[v as usize] = true;
            k_in.remove(&v);
            group.insert(h, v as usize);
            add_edges(v as usize, &mut k_in, &visited);
        }
        let mut members: Vec<u32> = group.members().iter().map(|&i| h.target(i as usize)).collect();
        members.sort_unstable();
        plan.emit(members);
    }

    let mut in_h = vec![false; num_targets as usize];
    for &t in h.targets() {
        in_h[t as usize] = true;
    }
    let rest: Vec<u32> = (0..num_targets).filter(|&v| !in_h[v as usize]).collect();
    plan.emit_chunks(&rest);
    Ok(plan)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GrouperHwConfig {
    pub n_mac: u32,
    pub update_cycles: u64,
}

impl Default for GrouperHwConfig {
    fn default() -> Self {
        Self {
            n_mac: 512,
            update_cycles: 2,
        }
    }
}

/// Cycles of one grouper round over `frontier` candidates: gain evaluation on
/// the MAC array, a comparison tree, and a table update.
pub fn grouper_step_cycles(frontier: u32, hw: &GrouperHwConfig) -> u64 {
    let eval = frontier.div_ceil(hw.n_mac.max(1)) as u64;
    let tree = (frontier.max(2) as f64).log2().ceil() as u64;
    eval + tree + hw.update_cycles
}

pub fn grouper_cost(steps: &[GroupingStep], hw: &GrouperHwConfig) -> u64 {
    steps.iter().map(|s| grouper_step_cycles(s.frontier, hw)).sum()
}

/// Cycle at which each group becomes available to the channels. Overlap
/// groups are released when the grouper finishes them; groups without
/// grouper work are released with the previous one.
pub fn release_cycles(plan: &GroupPlan, hw: &GrouperHwConfig) -> Vec<u64> {
    let mut per_group = vec![0u64; plan.groups.len()];
    for s in &plan.steps {
        per_group[s.group] += grouper_step_cycles(s.frontier, hw);
    }
    let mut t = 0;
    per_group
        .into_iter()
        .map(|c| {
            t += c;
            t
        })
        .collect()
}

/// Mean Jaccard similarity over all unordered member pairs of all groups
/// (groups of one contribute no pairs). `None` when there are no pairs.
pub fn mean_intra_group_jaccard(plan: &GroupPlan, sem: &SemanticGraphSet) -> Option<f64> {
    let mut sum = 0.0;
    let mut pairs = 0u64;
    for g in &plan.groups {
        let sets: Vec<Vec<VertexRef>> = g.members.iter().map(|&v| sem.super_neighborhood(v)).collect();
        let refs: Vec<&[VertexRef]> = sets.iter().map(Vec::as_slice).collect();
        hypergraph::for_each_overlapping_pair(&refs, None, |i, j, inter| {
            sum += inter as f64 / (refs[i].len() + refs[j].len() - inter) as f64;
        });
        let k = g.members.len() as u64;
        pairs += k * (k.saturating_sub(1)) / 2;
    }
    (pairs > 0).then(|| sum / pairs as f64)
}
