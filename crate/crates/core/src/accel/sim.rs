use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{rpe_aggregation_cycles, rpe_linear_cycles, ChannelReport, HwConfig, Paradigm, SimReport};
use crate::engine::{Model, Variant};
use crate::error::{Error, Result};
use crate::graph::{HetGraph, SemanticGraphSet, VertexRef};
use crate::grouping::{grouper_cost, release_cycles, GroupPlan};
use crate::memory::{AccessLogEntry, CacheKey, MemRole, MemorySystem};

pub struct SimInputs<'a> {
    pub graph: &'a HetGraph,
    pub semantic: &'a SemanticGraphSet,
    pub model: &'a Model,
    pub plan: &'a GroupPlan,
    pub paradigm: Paradigm,
    pub hw: &'a HwConfig,
    /// Keep a per-unit event trace.
    pub debug_events: bool,
    /// Keep the memory system's access log.
    pub access_log: bool,
    /// Keep the projected-feature read sequence in program order.
    pub feature_sequence: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimEvent {
    pub cycle: u64,
    pub unit: String,
    pub action: String,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub report: SimReport,
    pub events: Vec<SimEvent>,
    pub access_log: Option<Vec<AccessLogEntry>>,
    /// Per group in program order, groups concatenated in release order.
    pub feature_sequence: Vec<VertexRef>,
}

impl SimOutput {
    /// CSV `cycle,unit,action`, sorted by cycle then unit.
    pub fn write_events_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut ev: Vec<&SimEvent> = self.events.iter().collect();
        ev.sort_by(|a, b| (a.cycle, &a.unit).cmp(&(b.cycle, &b.unit)));
        writeln!(w, "cycle,unit,action")?;
        for e in ev {
            writeln!(w, "{},{},{}", e.cycle, e.unit, e.action)?;
        }
        Ok(())
    }
}

/// Earliest-free-first pool of identical units.
struct Pool {
    free: BinaryHeap<Reverse<(u64, u32)>>,
}

impl Pool {
    fn new(n: u32, at: u64) -> Self {
        Self {
            free: (0..n).map(|i| Reverse((at, i))).collect(),
        }
    }

    fn next_free(&self) -> u64 {
        self.free.peek().map_or(u64::MAX, |r| r.0 .0)
    }

    fn take(&mut self) -> (u64, u32) {
        self.free.pop().expect("non-empty pool").0
    }

    fn give(&mut self, unit: u32, at: u64) {
        self.free.push(Reverse((at, unit)));
    }
}

#[derive(Clone, Copy)]
enum Item {
    /// Semantics-complete: all relations of one target, fused immediately.
    Vertex(u32),
    /// Per-semantic: one target under one relation slot.
    Relation(u32, usize),
    /// Per-semantic: fusion of one target's intermediates.
    Fuse(u32),
}

struct Channel {
    agg: Pool,
    lin: Pool,
    groups: Vec<usize>,
    group_cursor: usize,
    items: Vec<Item>,
    item_cursor: usize,
    group_ready: u64,
    /// Per-semantic: cycle at which each member's intermediates are complete.
    fuse_ready: Vec<u64>,
    report: ChannelReport,
}

struct Ctx<'a> {
    inp: &'a SimInputs<'a>,
    mem: MemorySystem,
    d: u64,
    vec_bytes: u64,
    adjacency_streamed: bool,
    spill: bool,
    events: Vec<SimEvent>,
    sequences: Vec<Vec<VertexRef>>,
    finish: u64,
}

impl Ctx<'_> {
    fn event(&mut self, cycle: u64, unit: impl FnOnce() -> String, action: impl FnOnce() -> String) {
        if self.inp.debug_events {
            self.events.push(SimEvent {
                cycle,
                unit: unit(),
                action: action(),
            });
        }
    }

    fn read_feature(&mut self, v: VertexRef, channel: usize, group: usize, now: u64) -> u64 {
        if self.inp.feature_sequence {
            self.sequences[group].push(v);
        }
        self.mem
            .access(CacheKey::projected(v), self.vec_bytes, MemRole::ProjectedFeature, channel, now)
            .ready
    }

    fn read_adjacency(&mut self, edges: u64, rows: u64, now: u64) -> u64 {
        if self.adjacency_streamed {
            self.mem.dram_read(4 * edges + 8 * rows, MemRole::Adjacency, now)
        } else {
            now
        }
    }

    fn agg(&self, n: u64) -> u64 {
        rpe_aggregation_cycles(n, self.d, &self.inp.hw.rpe)
    }

    fn attention(&self, participants: u64) -> u64 {
        match self.inp.model.variant() {
            Variant::RgcnLike => 0,
            Variant::RgatLike => rpe_linear_cycles(2 * self.d, participants, &self.inp.hw.rpe),
        }
    }
}

pub fn simulate_run(inp: &SimInputs<'_>) -> Result<SimOutput> {
    let (g, sem, plan, hw) = (inp.graph, inp.semantic, inp.plan, inp.hw);
    hw.validate()?;
    plan.validate(sem.num_targets())?;
    if plan.n_channels != hw.channels.n_channels {
        return Err(Error::Validation(format!(
            "plan targets {} channels, hardware has {}",
            plan.n_channels, hw.channels.n_channels
        )));
    }
    if inp.model.num_relations() != sem.num_relations() {
        return Err(Error::Validation("model and semantic graphs disagree on relation count".into()));
    }
    if sem.target_type() != g.target_type() {
        return Err(Error::Validation("semantic graphs built for a different target type".into()));
    }

    let n_ch = hw.channels.n_channels;
    let d = inp.model.d_hid() as u64;
    let mut mem = MemorySystem::new(hw.memory, n_ch)?;
    if inp.access_log {
        mem.enable_log();
    }
    let bufs = hw.memory.buffers;
    let adjacency_streamed = g.adjacency_bytes() > bufs.adjacency_bytes;
    let mut ctx = Ctx {
        inp,
        mem,
        d,
        vec_bytes: d * 4,
        adjacency_streamed,
        spill: false,
        events: Vec::new(),
        sequences: vec![Vec::new(); plan.groups.len()],
        finish: 0,
    };

    // parameters and, when it fits its buffer, the adjacency are preloaded once
    let mut preload_done = ctx.mem.dram_read(inp.model.byte_len(), MemRole::Weights, 0);
    if !adjacency_streamed && g.adjacency_bytes() > 0 {
        preload_done = preload_done.max(ctx.mem.dram_read(g.adjacency_bytes(), MemRole::Adjacency, 0));
    }

    let fp = run_projection(&mut ctx, preload_done);
    let na_start = fp.end + hw.mode_switch_cycles;

    let steps_cost = grouper_cost(&plan.steps, &hw.grouper);
    let releases = release_cycles(plan, &hw.grouper);
    let (n_agg, n_lin) = hw.channels.split(inp.model.variant());

    // intermediates of a whole group are live together under per-semantic
    let largest_group = plan.groups.iter().map(|gr| gr.members.len()).max().unwrap_or(0) as u64;
    ctx.spill = inp.paradigm == Paradigm::PerSemantic
        && largest_group * sem.num_relations() as u64 * ctx.vec_bytes > hw.intermediate_capacity();

    let mut channels: Vec<Channel> = (0..n_ch)
        .map(|_| Channel {
            agg: Pool::new(n_agg, na_start),
            lin: Pool::new(n_lin, na_start),
            groups: Vec::new(),
            group_cursor: 0,
            items: Vec::new(),
            item_cursor: 0,
            group_ready: na_start,
            fuse_ready: Vec::new(),
            report: ChannelReport {
                finish_cycle: na_start,
                stall_cycles: 0,
                busy_rpe_cycles: 0,
                groups: 0,
                work_items: 0,
            },
        })
        .collect();
    for (i, gr) in plan.groups.iter().enumerate() {
        channels[gr.channel].groups.push(i);
    }

    let mut heap: BinaryHeap<Reverse<(u64, usize)>> = BinaryHeap::new();
    for (c, ch) in channels.iter_mut().enumerate() {
        if let Some(t) = advance(&mut ctx, ch, &releases, na_start) {
            heap.push(Reverse((t, c)));
        }
    }
    while let Some(Reverse((t, c))) = heap.pop() {
        dispatch(&mut ctx, &mut channels[c], c, t);
        if let Some(next) = advance(&mut ctx, &mut channels[c], &releases, na_start) {
            heap.push(Reverse((next, c)));
        }
    }

    let compute_end = ctx.finish.max(na_start);
    let total = compute_end.max(ctx.mem.counters().drained_at);
    let memory = ctx.mem.drain_and_report(total)?;
    let busy: u64 = channels.iter().map(|c| c.report.busy_rpe_cycles).sum();
    let na_cycles = total - na_start;
    let capacity = hw.channels.total_rpes() * na_cycles.max(1);
    let report = SimReport {
        paradigm: inp.paradigm,
        strategy: plan.strategy,
        variant: inp.model.variant(),
        total_cycles: total,
        fp_cycles: fp.end,
        na_start_cycle: na_start,
        na_cycles,
        grouper_cycles: steps_cost,
        stall_cycles: channels.iter().map(|c| c.report.stall_cycles).sum(),
        channels: channels.into_iter().map(|c| c.report).collect(),
        fp_busy_rpe_cycles: fp.busy,
        busy_rpe_cycles: busy,
        rpe_utilization: busy as f64 / capacity as f64,
        memory,
        hw: *hw,
    };
    Ok(SimOutput {
        report,
        events: ctx.events,
        access_log: ctx.mem.log().map(<[_]>::to_vec),
        feature_sequence: ctx.sequences.into_iter().flatten().collect(),
    })
}

struct FpResult {
    end: u64,
    busy: u64,
}

/// Projection of every vertex on all RPEs in linear mode; vertices are dealt
/// round-robin to channels and results land in the global cache.
fn run_projection(ctx: &mut Ctx<'_>, start: u64) -> FpResult {
    let (g, hw) = (ctx.inp.graph, ctx.inp.hw);
    let n_ch = hw.channels.n_channels;
    let footprint: u64 = g.vertex_types().iter().map(|t| t.count as u64).sum::<u64>() * ctx.vec_bytes;
    let write_back = footprint > hw.memory.cache.global_bytes;

    let vertices: Vec<VertexRef> = g
        .type_ids()
        .flat_map(|t| (0..g.vertex_type(t).count).map(move |i| VertexRef::new(t, i)))
        .collect();
    let mut pools: Vec<Pool> = (0..n_ch).map(|_| Pool::new(hw.channels.rpes_per_channel, start)).collect();
    let mut cursors = vec![0usize; n_ch];
    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        (0..n_ch).filter(|&c| c < vertices.len()).map(|c| Reverse((start, c))).collect();
    let mut end = start;
    let mut busy = 0;
    while let Some(Reverse((_, c))) = heap.pop() {
        let idx = c + cursors[c] * n_ch;
        cursors[c] += 1;
        let v = vertices[idx];
        let (t, unit) = pools[c].take();
        let d_in = g.vertex_type(v.vtype).feature_dim as u64;
        let ready = if d_in > 0 {
            ctx.mem.dram_read(d_in * 4, MemRole::RawFeature, t)
        } else {
            t
        };
        let work = rpe_linear_cycles(d_in, ctx.d, &hw.rpe);
        let begin = ready.max(t);
        let finish = begin + work;
        busy += work;
        ctx.mem.fill_global(CacheKey::projected(v), ctx.vec_bytes);
        if write_back {
            ctx.mem.dram_write(ctx.vec_bytes, MemRole::ProjectedFeature, t);
        }
        ctx.event(begin, || format!("ch{c}.rpe{unit}"), || format!("fp-start {v}"));
        ctx.event(finish, || format!("ch{c}.rpe{unit}"), || format!("fp-end {v}"));
        pools[c].give(unit, finish);
        end = end.max(finish);
        if c + cursors[c] * n_ch < vertices.len() {
            heap.push(Reverse((pools[c].next_free(), c)));
        }
    }
    FpResult { end, busy }
}

/// Loads the next item of a channel if needed; returns when it can dispatch.
fn advance(ctx: &mut Ctx<'_>, ch: &mut Channel, releases: &[u64], na_start: u64) -> Option<u64> {
    while ch.item_cursor == ch.items.len() {
        let &gi = ch.groups.get(ch.group_cursor)?;
        ch.group_cursor += 1;
        let group = &ctx.inp.plan.groups[gi];
        let release = releases[gi].max(na_start);
        let idle_from = ch.agg.next_free();
        if release > idle_from {
            ch.report.stall_cycles += release - idle_from;
        }
        ch.group_ready = release;
        ch.report.groups += 1;
        ch.items.clear();
        ch.item_cursor = 0;
        match ctx.inp.paradigm {
            Paradigm::SemanticsComplete => ch.items.extend(group.members.iter().map(|&v| Item::Vertex(v))),
            Paradigm::PerSemantic => {
                let sem = ctx.inp.semantic;
                for slot in 0..sem.num_relations() {
                    for (k, &v) in group.members.iter().enumerate() {
                        if !sem.graph(slot).neighbors(v).is_empty() {
                            ch.items.push(Item::Relation(k as u32, slot));
                        }
                    }
                }
                ch.items.extend((0..group.members.len() as u32).map(Item::Fuse));
                ch.fuse_ready = vec![release; group.members.len()];
            }
        }
    }
    let base = ch.agg.next_free().max(ch.group_ready);
    Some(match ch.items[ch.item_cursor] {
        Item::Fuse(k) => base.max(ch.fuse_ready[k as usize]),
        _ => base,
    })
}

fn dispatch(ctx: &mut Ctx<'_>, ch: &mut Channel, c: usize, t: u64) {
    let item = ch.items[ch.item_cursor];
    ch.item_cursor += 1;
    ch.report.work_items += 1;
    let gi = ch.groups[ch.group_cursor - 1];
    let group = &ctx.inp.plan.groups[gi];
    let sem = ctx.inp.semantic;
    let tt = sem.target_type();
    let (_, unit) = ch.agg.take();

    let (finish, work, label) = match item {
        Item::Vertex(v) => {
            let target = VertexRef::new(tt, v);
            let edges: u64 = (0..sem.num_relations()).map(|r| sem.graph(r).neighbors(v).len() as u64).sum();
            let mut ready = ctx.read_adjacency(edges, sem.num_relations() as u64, t);
            ready = ready.max(ctx.read_feature(target, c, gi, t));
            let mut agg_work = 0;
            let mut att_work = 0;
            for r in 0..sem.num_relations() {
                let sg = sem.graph(r);
                let nbrs = sg.neighbors(v);
                for &u in nbrs {
                    ready = ready.max(ctx.read_feature(VertexRef::new(sg.src_type, u), c, gi, t));
                }
                if !nbrs.is_empty() {
                    agg_work += ctx.agg(nbrs.len() as u64 + 1);
                    att_work += ctx.attention(nbrs.len() as u64 + 1);
                }
            }
            agg_work += ctx.agg(sem.num_relations() as u64) + ctx.inp.hw.activation_cycles;
            let start = run_attention(ctx, ch, c, unit, ready.max(t), att_work);
            (start + agg_work, agg_work, format!("vertex {target}"))
        }
        Item::Relation(k, r) => {
            let v = group.members[k as usize];
            let target = VertexRef::new(tt, v);
            let sg = sem.graph(r);
            let nbrs = sg.neighbors(v);
            let mut ready = ctx.read_adjacency(nbrs.len() as u64, 1, t);
            ready = ready.max(ctx.read_feature(target, c, gi, t));
            for &u in nbrs {
                ready = ready.max(ctx.read_feature(VertexRef::new(sg.src_type, u), c, gi, t));
            }
            let n = nbrs.len() as u64 + 1;
            let att = ctx.attention(n);
            let start = run_attention(ctx, ch, c, unit, ready.max(t), att);
            let work = ctx.agg(n);
            let finish = start + work;
            if ctx.spill {
                ctx.mem.dram_write(ctx.vec_bytes, MemRole::IntermediateNa, t);
                ctx.mem.spill_intermediate(ctx.vec_bytes);
            }
            ch.fuse_ready[k as usize] = ch.fuse_ready[k as usize].max(finish);
            (finish, work, format!("relation {r} {target}"))
        }
        Item::Fuse(k) => {
            let v = group.members[k as usize];
            let target = VertexRef::new(tt, v);
            let mut ready = t;
            let mut any_empty = false;
            for r in 0..sem.num_relations() {
                if sem.graph(r).neighbors(v).is_empty() {
                    any_empty = true;
                } else if ctx.spill {
                    ready = ready.max(ctx.mem.dram_read(ctx.vec_bytes, MemRole::IntermediateNa, t));
                    ctx.mem.release_intermediate(ctx.vec_bytes);
                }
            }
            if any_empty {
                ready = ready.max(ctx.read_feature(target, c, gi, t));
            }
            let work = ctx.agg(sem.num_relations() as u64) + ctx.inp.hw.activation_cycles;
            (ready + work, work, format!("fuse {target}"))
        }
    };
    ch.report.busy_rpe_cycles += work;
    let start = finish - work;
    ctx.event(start, || format!("ch{c}.agg{unit}"), || format!("start {label}"));
    ctx.event(finish, || format!("ch{c}.agg{unit}"), || format!("end {label}"));
    ch.agg.give(unit, finish);
    ch.report.finish_cycle = ch.report.finish_cycle.max(finish);
    ctx.finish = ctx.finish.max(finish);
}

/// Runs attention scoring on the channel's linear-mode RPEs once data is
/// ready; returns when aggregation may start.
fn run_attention(ctx: &mut Ctx<'_>, ch: &mut Channel, c: usize, agg_unit: u32, ready: u64, work: u64) -> u64 {
    if work == 0 {
        return ready;
    }
    if ch.lin.free.is_empty() {
        // no linear-mode units: the aggregation RPE scores serially
        ch.report.busy_rpe_cycles += work;
        ctx.event(ready, || format!("ch{c}.agg{agg_unit}"), || "start attention".to_string());
        ctx.event(ready + work, || format!("ch{c}.agg{agg_unit}"), || "end attention".to_string());
        return ready + work;
    }
    let (free, unit) = ch.lin.take();
    let start = free.max(ready);
    let end = start + work;
    ch.report.busy_rpe_cycles += work;
    ctx.event(start, || format!("ch{c}.lin{unit}"), || "start attention".to_string());
    ctx.event(end, || format!("ch{c}.lin{unit}"), || "end attention".to_string());
    ch.lin.give(unit, end);
    end
}
