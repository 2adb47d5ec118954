//! Prints the ablation ladder for a few seeds.
//!
//! cargo run --release -p hgnn-sim --example ladder -- [overlap] [seeds] [am-like]

use std::time::Instant;

use hgnn_sim::experiment::{prepare, run_one, ExperimentConfig, Profile, RunOptions};

fn main() -> hgnn_sim::Result<()> {
    let args: Vec<String> = std::env::args().collect();
    let overlap: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(0.6);
    let seeds: u64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(3);
    for seed in 0..seeds {
        let mut cfg = ExperimentConfig::default();
        cfg.seed = seed;
        cfg.graph.profile = if args.get(3).is_some_and(|a| a == "am-like") {
            Profile::AmLike
        } else {
            Profile::Ablation
        };
        cfg.graph.overlap = Some(overlap);
        let t = Instant::now();
        let prep = prepare(&cfg)?;
        let edges: usize = (0..prep.semantic.num_relations())
            .map(|r| prep.semantic.graph(r).num_edges())
            .sum();
        println!(
            "seed {seed}: targets {} edges {edges} (prepare {:?})",
            prep.semantic.num_targets(),
            t.elapsed()
        );
        let mut feat = Vec::new();
        for spec in cfg.resolved_runs() {
            let t = Instant::now();
            let r = run_one(&prep, &cfg, &spec, RunOptions::default())?;
            let m = &r.sim.report.memory;
            feat.push(m.dram_feature_bytes());
            println!(
                "  {:>2} cycles {:>10} feat {:>11} dram {:>11} hits l/g {}/{} fills {} ({:?})",
                spec.name,
                r.sim.report.total_cycles,
                m.dram_feature_bytes(),
                m.dram_bytes,
                m.local_hits,
                m.global_hits,
                m.dram_fills,
                t.elapsed()
            );
        }
        println!(
            "  S vs B {:.1}%  O vs P {:.1}%",
            100.0 * (1.0 - feat[1] as f64 / feat[0] as f64),
            100.0 * (1.0 - feat[3] as f64 / feat[2] as f64)
        );
    }
    Ok(())
}
