//! Command-line harness: synthetic graph generation, single runs, the
//! ablation ladder and quick oracle checks.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use hgnn_sim::accel::{
    rpe_aggregation_cycles, rpe_linear_cycles, simulate_aggregation, simulate_linear, Paradigm, RpeConfig, SimReport,
};
use hgnn_sim::experiment::{
    functional_summary, prepare, run_functional, run_one, ExperimentConfig, Prepared, Profile, RunOptions, RunResult,
    RunSpec,
};
use hgnn_sim::graph::{generate_synthetic, write_binary, write_text};
use hgnn_sim::metrics::{consolidate, cross_check, write_csv, CrossCheck, FunctionalSummary, MetricsBundle, SimRun};

#[derive(Parser)]
#[command(name = "hgnn-sim", version, about = "Cycle-level HGNN accelerator simulator")]
struct Cli {
    /// Overrides the seed of the config (graph generation, grouping, model).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Also write per-unit event, memory access and grouping CSVs.
    #[arg(long, global = true)]
    debug_trace: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic heterogeneous graph file.
    Gen(GenArgs),
    /// Execute the runs listed in a config file (the ablation ladder if none).
    Run(RunArgs),
    /// Execute the -B/-S/-P/-O ablation ladder.
    Ablate(AblateArgs),
    /// Run the functional/cycle-model oracle checks on a configured graph.
    Check(CheckArgs),
}

#[derive(Args)]
struct GraphFlags {
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    #[arg(long)]
    targets: Option<u32>,
    #[arg(long)]
    relations: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    overlap: Option<f64>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ProfileArg {
    Small,
    AmLike,
    Ablation,
    Dense,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Self {
        match p {
            ProfileArg::Small => Profile::Small,
            ProfileArg::AmLike => Profile::AmLike,
            ProfileArg::Ablation => Profile::Ablation,
            ProfileArg::Dense => Profile::Dense,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    graph: GraphFlags,
    /// Output file; `.bin` selects the binary format. Defaults to <out-dir>/graph.txt.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML config file.
    config: PathBuf,
    /// Run the functional engine under both paradigms and require equal
    /// embeddings and matching feature-read traces before reporting.
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Args)]
struct AblateArgs {
    /// Optional TOML config; its `runs` are replaced by the ladder.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphFlags,
    /// Channels for the multi-channel steps.
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    oracle_check: bool,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    graph: GraphFlags,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match &cli.cmd {
        Cmd::Gen(a) => gen(&cli, a).map(|_| ExitCode::SUCCESS),
        Cmd::Run(a) => {
            let cfg = load_config(Some(&a.config), &cli, None)?;
            execute(&cli, &cfg, a.oracle_check, "summary.csv").map(|_| ExitCode::SUCCESS)
        }
        Cmd::Ablate(a) => {
            let mut cfg = load_config(a.config.as_deref(), &cli, Some(&a.graph))?;
            if let Some(c) = a.channels {
                cfg.hardware.channels.n_channels = c;
            }
            cfg.runs.clear();
            cfg.runs = cfg.resolved_runs();
            execute(&cli, &cfg, a.oracle_check, "ablation.csv").map(|_| ExitCode::SUCCESS)
        }
        Cmd::Check(a) => {
            let cfg = load_config(a.config.as_deref(), &cli, Some(&a.graph))?;
            check(&cfg)
        }
    }
}

fn apply_graph_flags(cfg: &mut ExperimentConfig, g: &GraphFlags) {
    if let Some(p) = g.profile {
        cfg.graph.profile = p.into();
    }
    cfg.graph.targets = g.targets.or(cfg.graph.targets);
    cfg.graph.relations = g.relations.or(cfg.graph.relations);
    cfg.graph.alpha = g.alpha.or(cfg.graph.alpha);
    cfg.graph.overlap = g.overlap.or(cfg.graph.overlap);
}

fn load_config(path: Option<&Path>, cli: &Cli, flags: Option<&GraphFlags>) -> Result<ExperimentConfig> {
    let mut cfg: ExperimentConfig = match path {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            toml::from_str(&text).with_context(|| format!("invalid config {}", p.display()))?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(f) = flags {
        apply_graph_flags(&mut cfg, f);
    }
    cfg.validate().context("invalid configuration")?;
    cfg.runs = cfg.resolved_runs();
    cfg.validate().context("invalid configuration")?;
    eprintln!("# resolved configuration");
    eprint!("{}", toml::to_string_pretty(&cfg).context("serializing config")?);
    Ok(cfg)
}

/// Writes through a temporary file in the destination directory and renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn gen(cli: &Cli, a: &GenArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::default();
    cfg.graph.profile = Profile::Small;
    cfg.seed = cli.seed.unwrap_or(0);
    apply_graph_flags(&mut cfg, &a.graph);
    let spec = cfg.graph.synthetic_spec(cfg.seed);
    let (g, f) = generate_synthetic(&spec)?;
    let path = a.output.clone().unwrap_or_else(|| cli.out_dir.join("graph.txt"));
    let bytes = if path.extension().is_some_and(|e| e == "bin") {
        let mut buf = Vec::new();
        write_binary(&g, &f, &mut buf)?;
        buf
    } else {
        write_text(&g, None).into_bytes()
    };
    write_atomic(&path, &bytes)?;
    eprintln!(
        "wrote {} ({} vertices, {} edges, {} relations)",
        path.display(),
        g.num_vertices(),
        g.num_edges(),
        g.relations().len()
    );
    Ok(())
}

#[derive(Serialize)]
struct RunReport<'a> {
    config: &'a ExperimentConfig,
    run: &'a RunSpec,
    fingerprint: &'a str,
    functional: &'a FunctionalSummary,
    report: &'a SimReport,
    metrics: &'a MetricsBundle,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<&'a CrossCheck>,
}

fn execute(cli: &Cli, cfg: &ExperimentConfig, oracle: bool, csv_name: &str) -> Result<()> {
    let prep = prepare(cfg)?;
    let opts = RunOptions {
        debug_events: cli.debug_trace,
        access_log: cli.debug_trace,
        feature_sequence: oracle,
    };
    if oracle {
        paradigm_equivalence(&prep)?;
    }
    let mut results: Vec<(RunResult, FunctionalSummary, Option<CrossCheck>)> = Vec::new();
    for spec in &cfg.runs {
        let r = run_one(&prep, cfg, spec, opts)?;
        let order = r.plan.vertex_order();
        let out = run_functional(&prep, spec.paradigm, &order)?;
        let summary = functional_summary(&prep, &out)?;
        let cc = oracle.then(|| cross_check(&out.trace, &r.sim.report.memory, Some(&r.sim.feature_sequence)));
        if let Some(cc) = &cc {
            if !cc.pass {
                bail!("oracle check failed for run {}: {}", spec.name, cc.message);
            }
        }
        eprintln!(
            "{:>24}: {} cycles, {} DRAM feature bytes",
            spec.name,
            r.sim.report.total_cycles,
            r.sim.report.memory.dram_feature_bytes()
        );
        results.push((r, summary, cc));
    }

    let base = &results[0].0;
    let baseline = SimRun {
        name: &base.spec.name,
        fingerprint: &prep.fingerprint,
        report: &base.sim.report,
    };
    let mut bundles = Vec::new();
    for (r, summary, cc) in &results {
        let run = SimRun {
            name: &r.spec.name,
            fingerprint: &prep.fingerprint,
            report: &r.sim.report,
        };
        let bundle = consolidate(Some(summary), run, baseline)?;
        let doc = RunReport {
            config: cfg,
            run: &r.spec,
            fingerprint: &prep.fingerprint,
            functional: summary,
            report: &r.sim.report,
            metrics: &bundle,
            oracle: cc.as_ref(),
        };
        let json = serde_json::to_string_pretty(&doc)?;
        write_atomic(&cli.out_dir.join(format!("run-{}.json", r.spec.name)), json.as_bytes())?;
        if cli.debug_trace {
            write_debug(&cli.out_dir, r)?;
        }
        bundles.push(bundle);
    }
    let mut csv = Vec::new();
    write_csv(&bundles, &mut csv)?;
    write_atomic(&cli.out_dir.join(csv_name), &csv)?;
    eprintln!("reports written to {}", cli.out_dir.display());
    Ok(())
}

fn write_debug(dir: &Path, r: &RunResult) -> Result<()> {
    let name = &r.spec.name;
    let mut buf = Vec::new();
    r.sim.write_events_csv(&mut buf)?;
    write_atomic(&dir.join(format!("run-{name}.events.csv")), &buf)?;
    buf.clear();
    r.plan.write_csv(&mut buf)?;
    write_atomic(&dir.join(format!("run-{name}.groups.csv")), &buf)?;
    if let Some(log) = &r.sim.access_log {
        buf.clear();
        writeln!(buf, "cycle,key,role,level,bytes")?;
        for e in log {
            writeln!(buf, "{}", e.csv_row())?;
        }
        write_atomic(&dir.join(format!("run-{name}.access.csv")), &buf)?;
    }
    Ok(())
}

/// Both paradigms must produce the same embeddings: bitwise, or within a
/// relative 1e-5 per element.
fn paradigm_equivalence(prep: &Prepared) -> Result<()> {
    let order: Vec<u32> = (0..prep.semantic.num_targets()).collect();
    let a = run_functional(prep, Paradigm::PerSemantic, &order)?;
    let b = run_functional(prep, Paradigm::SemanticsComplete, &order)?;
    let (x, y) = (a.embeddings.as_slice(), b.embeddings.as_slice());
    if x.len() != y.len() {
        bail!("embedding shapes differ");
    }
    for (i, (p, q)) in x.iter().zip(y).enumerate() {
        if p.to_bits() != q.to_bits() && (p - q).abs() > 1e-5 * p.abs().max(q.abs()) {
            bail!("embeddings differ at element {i}: {p} vs {q}");
        }
    }
    eprintln!("oracle: paradigms agree on {} embedding values", x.len());
    Ok(())
}

fn check(cfg: &ExperimentConfig) -> Result<ExitCode> {
    let prep = prepare(cfg)?;
    let mut ok = true;
    let mut report = |name: &str, pass: bool, detail: String| {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        ok &= pass;
    };

    match paradigm_equivalence(&prep) {
        Ok(()) => report("paradigm-equivalence", true, "embeddings agree".into()),
        Err(e) => report("paradigm-equivalence", false, e.to_string()),
    }

    let opts = RunOptions {
        feature_sequence: true,
        ..RunOptions::default()
    };
    for spec in &cfg.runs {
        let r = run_one(&prep, cfg, spec, opts)?;
        let out = run_functional(&prep, spec.paradigm, &r.plan.vertex_order())?;
        let cc = cross_check(&out.trace, &r.sim.report.memory, Some(&r.sim.feature_sequence));
        report(&format!("trace-vs-simulator {}", spec.name), cc.pass, cc.message.clone());
        let e = &r.sim.report.memory;
        let pj = e.dram_bytes as f64 * 8.0 * 7.0;
        report(
            &format!("dram-energy {}", spec.name),
            e.dram_energy_pj == pj,
            format!("{} pJ for {} bytes", e.dram_energy_pj, e.dram_bytes),
        );
    }

    let rpe = cfg.hardware.rpe;
    let mut mismatches = 0;
    let mut cases = 0;
    for n in 0..=33u64 {
        for d in [1u64, 3, 8] {
            cases += 2;
            mismatches += u32::from(simulate_aggregation(n, d, &rpe).cycles != rpe_aggregation_cycles(n, d, &rpe));
            mismatches += u32::from(simulate_linear(d * 5, n, &rpe).cycles != rpe_linear_cycles(d * 5, n, &rpe));
        }
    }
    let two = RpeConfig { moa_count: 2, ..rpe };
    let odd = simulate_aggregation(5, 1, &two).cycles;
    report(
        "rpe-closed-forms",
        mismatches == 0 && odd == 7,
        format!("{mismatches} of {cases} workloads differ; n=5 L=2 d=1 takes {odd} cycles"),
    );
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
