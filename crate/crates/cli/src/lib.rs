//! `traverse` command-line front end: planning, weight sweeps, clustering,
//! mission planning, benchmarking, rendering and synthetic map generation.
//!
//! Every subcommand is reproducible for a fixed config and seed; wall-clock
//! timings go to a `timings.json` sidecar so the remaining outputs stay
//! byte-exact across runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use traverse_core::bench::{run_bench, BenchConfig, BenchReport};
use traverse_core::cluster::{cluster_db, cluster_summary, default_candidates, ClusterReport};
use traverse_core::cost::{compute_norms, CostConfig, CostWeights};
use traverse_core::evaluator::{evaluate, NodeTime, PathMetrics};
use traverse_core::mission::{
    compare_missions, plan_mission, select_constrained, MissionPlan, MissionSpec,
};
use traverse_core::planner::{plan, HeuristicMode, PlanRequest, PlanStats};
use traverse_core::raster::{assemble_stack, load_layer, Cell, LayerKind, MapStack};
use traverse_core::sweep::{
    build_weight_grid, dedupe_grid, encode_path_rle, map_id, read_csv, run_sweep,
    write_csv, DatabaseMeta, PathDatabase, DEFAULT_EPSILON,
};
use traverse_core::synth::{write_synth_layers, SynthParams};
use traverse_core::{PlannerError, Result};

pub mod render_cmd;

/// Exit codes: distinct nonzero classes so scripts can react to failure
/// modes without parsing stderr.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_INFEASIBLE: i32 = 4;
pub const EXIT_CONSTRAINT: i32 = 5;

pub fn exit_code(err: &PlannerError) -> i32 {
    match err {
        PlannerError::Io { .. } => EXIT_IO,
        PlannerError::NoPath(..)
        | PlannerError::BadEndpoint(..)
        | PlannerError::FullyBanned
        | PlannerError::AllTriplesFailed => EXIT_INFEASIBLE,
        PlannerError::ConstraintInfeasible(..) => EXIT_CONSTRAINT,
        _ => EXIT_CONFIG,
    }
}

#[derive(Parser)]
#[command(name = "traverse", about = "Multi-objective global path planning on raster terrain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Plan a single path and print its cost table.
    Plan(PlanArgs),
    /// Sweep the weight simplex into a path database CSV.
    Sweep(SweepArgs),
    /// Cluster a path database in cost space.
    Cluster(ClusterArgs),
    /// Plan a waypoint mission from a spec file.
    Mission(MissionArgs),
    /// Measure plan runtime over a ladder of map sizes.
    Bench(BenchArgs),
    /// Render map layers and paths to PPM + SVG.
    Render(RenderArgs),
    /// Generate seeded synthetic map layers.
    Synth(SynthArgs),
}

#[derive(Args)]
pub struct MapArgs {
    /// Elevation layer (ESRI ASCII grid), required.
    #[arg(long = "map-dem")]
    pub map_dem: PathBuf,
    /// Rock abundance layer; defaults to rock-free.
    #[arg(long = "map-rock")]
    pub map_rock: Option<PathBuf>,
    /// Scientific interest layer; defaults to zero interest.
    #[arg(long = "map-science")]
    pub map_science: Option<PathBuf>,
    /// User banned-area mask (0/1 grid); defaults to none.
    #[arg(long = "map-banned")]
    pub map_banned: Option<PathBuf>,
    /// Cost model config file; defaults model ANYmal.
    #[arg(long = "cost-config")]
    pub cost_config: Option<PathBuf>,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Output directory; created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; env var PLANNER_THREADS overrides this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Count every node step as one fixed simulation interval instead of
    /// distance/velocity when aggregating energy.
    #[arg(long = "legacy-node-time", default_value_t = false)]
    pub legacy_node_time: bool,
}

impl CommonArgs {
    pub fn node_time(&self) -> NodeTime {
        if self.legacy_node_time {
            NodeTime::LegacyFixed
        } else {
            NodeTime::PerDistance
        }
    }

    pub fn effective_workers(&self) -> usize {
        if let Ok(v) = std::env::var("PLANNER_THREADS") {
            if let Ok(n) = v.parse::<usize>() {
                if n >= 1 {
                    return n;
                }
            }
        }
        self.workers.unwrap_or_else(|| {
            std::thread::available_parallelism().map_or(1, |n| n.get())
        })
    }
}

#[derive(Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub maps: MapArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Start cell as `row,col`.
    #[arg(long, value_parser = parse_cell)]
    pub start: Cell,
    /// Goal cell as `row,col`.
    #[arg(long, value_parser = parse_cell)]
    pub goal: Cell,
    /// Weight triple `a1,a2,a3`, each in [0,1], summing to 1.
    #[arg(long, value_parser = parse_weights)]
    pub weights: CostWeights,
    #[arg(long, value_enum, default_value_t = HeuristicArg::Admissible)]
    pub heuristic: HeuristicArg,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum HeuristicArg {
    Admissible,
    Zero,
}

impl From<HeuristicArg> for HeuristicMode {
    fn from(h: HeuristicArg) -> HeuristicMode {
        match h {
            HeuristicArg::Admissible => HeuristicMode::Admissible,
            HeuristicArg::Zero => HeuristicMode::Zero,
        }
    }
}

#[derive(Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub maps: MapArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_parser = parse_cell)]
    pub start: Cell,
    #[arg(long, value_parser = parse_cell)]
    pub goal: Cell,
    /// Log-spaced steps per weight axis (10 gives 10^3 combinations).
    #[arg(long, default_value_t = 10)]
    pub steps: usize,
    /// Smallest nonzero weight on the log grid.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Drop near-duplicate triples after normalization.
    #[arg(long, default_value_t = false)]
    pub dedupe: bool,
}

#[derive(Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Path database CSV written by `sweep` (reads the `.meta.json`
    /// sidecar next to it).
    #[arg(long)]
    pub db: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub k: usize,
    /// k-means++ candidate draws per center; default 2 + ln k.
    #[arg(long)]
    pub candidates: Option<usize>,
}

#[derive(Args)]
pub struct MissionArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Mission spec file (key-value; see README).
    #[arg(long)]
    pub spec: PathBuf,
    /// Second mission spec to plan and compare against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

#[derive(Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Map edge lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "64,128,256,512")]
    pub sizes: Vec<usize>,
    /// Endpoint pairs per size.
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    /// Weight triples per endpoint pair.
    #[arg(long, default_value_t = 5)]
    pub triples: usize,
}

#[derive(Args)]
pub struct RenderArgs {
    #[command(flatten)]
    pub maps: MapArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Path database CSV; omit for a backdrop-only image.
    #[arg(long)]
    pub db: Option<PathBuf>,
    /// Cluster report JSON from `cluster`; colors paths per cluster and
    /// highlights representatives.
    #[arg(long)]
    pub clusters: Option<PathBuf>,
    /// Pixels per map cell in the PPM output.
    #[arg(long, default_value_t = 8)]
    pub scale: usize,
}

#[derive(Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Square map edge length in cells.
    #[arg(long, default_value_t = 64)]
    pub size: usize,
    #[arg(long = "cell-size", default_value_t = 8.0)]
    pub cell_size: f64,
    #[arg(long, default_value_t = 0.5)]
    pub roughness: f64,
    #[arg(long = "rock-density", default_value_t = 0.5)]
    pub rock_density: f64,
    #[arg(long, default_value_t = 3)]
    pub hotspots: usize,
}

pub fn parse_cell(s: &str) -> std::result::Result<Cell, String> {
    let (r, c) = s.split_once(',').ok_or("expected `row,col`")?;
    Ok(Cell::new(
        r.trim().parse().map_err(|e| format!("row: {e}"))?,
        c.trim().parse().map_err(|e| format!("col: {e}"))?,
    ))
}

pub fn parse_weights(s: &str) -> std::result::Result<CostWeights, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err("expected `a1,a2,a3`".into());
    }
    let mut v = [0.0f64; 3];
    for (slot, part) in v.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|e| format!("weight: {e}"))?;
    }
    CostWeights::new(v[0], v[1], v[2]).map_err(|e| e.to_string())
}

pub(crate) fn load_cost_config(path: &Option<PathBuf>) -> Result<CostConfig> {
    match path {
        Some(p) => CostConfig::load(p),
        None => Ok(CostConfig::default()),
    }
}

pub(crate) fn load_stack(maps: &MapArgs, cfg: &CostConfig) -> Result<MapStack> {
    let mut layers = vec![load_layer(&maps.map_dem, LayerKind::Elevation)?];
    if let Some(p) = &maps.map_rock {
        layers.push(load_layer(p, LayerKind::RockAbundance)?);
    }
    if let Some(p) = &maps.map_science {
        layers.push(load_layer(p, LayerKind::ScientificInterest)?);
    }
    if let Some(p) = &maps.map_banned {
        layers.push(load_layer(p, LayerKind::Banned)?);
    }
    assemble_stack(layers, &cfg.ban_limits())
}

pub(crate) fn ensure_out(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| PlannerError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| PlannerError::Internal(format!("json: {e}")))?;
    text.push('\n');
    std::fs::write(path, text).map_err(|source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Wall-clock sidecar; the only output file allowed to differ between
/// otherwise identical runs.
fn write_timings(out: &Path, subcommand: &str, sections: &[(&str, f64)]) -> Result<()> {
    #[derive(Serialize)]
    struct Timings<'a> {
        subcommand: &'a str,
        sections_ms: Vec<(&'a str, f64)>,
    }
    write_json(
        &Timings { subcommand, sections_ms: sections.to_vec() },
        &out.join("timings.json"),
    )
}

const METRIC_ROWS: [&str; 5] = [
    "Energy cost",
    "Risk cost",
    "Scientific cost",
    "Total cost",
    "Path length [m]",
];

/// Table II/III-style rows; full-precision values so structural identities
/// (corner weights: Total == active component) survive the printout.
fn print_cost_table(metrics: &PathMetrics, total: f64) {
    let values = [
        metrics.component_costs.0,
        metrics.component_costs.1,
        metrics.component_costs.2,
        total,
        metrics.length_m,
    ];
    for (name, v) in METRIC_ROWS.iter().zip(values) {
        println!("{name:<18} {v}");
    }
}

#[derive(Serialize)]
struct PlanReport {
    map_id: String,
    start: Cell,
    goal: Cell,
    weights: CostWeights,
    heuristic: HeuristicMode,
    node_time: NodeTime,
    cost_config: CostConfig,
    metrics: PathMetrics,
    total_cost: f64,
    stats: PlanStats,
    path_rle: String,
    cells: Vec<Cell>,
    edge_breakdowns: Vec<traverse_core::cost::EdgeCostBreakdown>,
}

pub fn cmd_plan(args: &PlanArgs) -> Result<()> {
    let t0 = Instant::now();
    let cfg = load_cost_config(&args.maps.cost_config)?;
    let stack = load_stack(&args.maps, &cfg)?;
    let norms = compute_norms(&stack, &args.weights, &cfg)?;
    let t1 = Instant::now();
    let request = PlanRequest {
        start: args.start,
        goal: args.goal,
        weights: args.weights,
        heuristic_mode: args.heuristic.into(),
    };
    let outcome = plan(&stack, &request, &norms)?;
    let t2 = Instant::now();
    let metrics = evaluate(&outcome.path, &stack, &norms, args.common.node_time());

    ensure_out(&args.common.out)?;
    let report = PlanReport {
        map_id: map_id(&stack, &cfg),
        start: args.start,
        goal: args.goal,
        weights: args.weights,
        heuristic: args.heuristic.into(),
        node_time: args.common.node_time(),
        cost_config: cfg,
        metrics,
        total_cost: outcome.path.total_cost,
        stats: outcome.stats,
        path_rle: encode_path_rle(&outcome.path.cells),
        cells: outcome.path.cells.clone(),
        edge_breakdowns: outcome.path.edge_breakdowns.clone(),
    };
    write_json(&report, &args.common.out.join("plan.json"))?;
    print_cost_table(&metrics, outcome.path.total_cost);
    write_timings(
        &args.common.out,
        "plan",
        &[
            ("init", (t1 - t0).as_secs_f64() * 1e3),
            ("search", (t2 - t1).as_secs_f64() * 1e3),
        ],
    )
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<()> {
    let t0 = Instant::now();
    let cfg = load_cost_config(&args.maps.cost_config)?;
    let stack = load_stack(&args.maps, &cfg)?;
    let mut grid = build_weight_grid(args.steps, args.epsilon)?;
    if args.dedupe {
        dedupe_grid(&mut grid);
    }
    let workers = args.common.effective_workers();
    let db = run_sweep(
        &stack,
        &cfg,
        args.start,
        args.goal,
        &grid,
        workers,
        args.common.node_time(),
    )?;
    let t1 = Instant::now();

    ensure_out(&args.common.out)?;
    let csv_path = args.common.out.join("sweep.csv");
    write_csv(&db, &csv_path)?;
    let meta = DatabaseMeta {
        map_id: db.map_id.clone(),
        start: db.start,
        goal: db.goal,
        step_count: grid.step_count,
        epsilon: grid.epsilon,
        n_records: db.records.len(),
        n_failures: db.records.iter().filter(|r| !r.is_ok()).count(),
        cost_config: cfg,
    };
    write_json(&meta, &meta_path(&csv_path))?;
    println!(
        "swept {} weight triples ({} failures) -> {}",
        meta.n_records,
        meta.n_failures,
        csv_path.display()
    );
    write_timings(&args.common.out, "sweep", &[("sweep", (t1 - t0).as_secs_f64() * 1e3)])
}

/// `sweep.csv` -> `sweep.meta.json`.
pub fn meta_path(csv: &Path) -> PathBuf {
    csv.with_extension("meta.json")
}

pub fn load_db(csv: &Path) -> Result<PathDatabase> {
    let meta_file = meta_path(csv);
    let text = std::fs::read_to_string(&meta_file).map_err(|source| PlannerError::Io {
        path: meta_file.clone(),
        source,
    })?;
    let meta: DatabaseMeta = serde_json::from_str(&text).map_err(|e| PlannerError::Parse {
        path: meta_file,
        msg: e.to_string(),
    })?;
    read_csv(csv, meta.map_id, meta.start, meta.goal)
}

#[derive(Serialize)]
struct ClusterOutput {
    db: PathBuf,
    seed: u64,
    report: ClusterReport,
    summary: Vec<traverse_core::cluster::ClusterSummaryRow>,
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let t0 = Instant::now();
    let db = load_db(&args.db)?;
    let candidates = args.candidates.unwrap_or_else(|| default_candidates(args.k));
    let n_ok = db.records.iter().filter(|r| r.is_ok()).count();

    // Elbow guide before the chosen k, as far as the database allows.
    println!("{:>2} {:>12} {:>10}", "k", "total SSE", "max var");
    for k in 2..=8usize.min(n_ok) {
        let r = cluster_db(&db, k, args.common.seed, default_candidates(k))?;
        let sse = r.sse_history.last().copied().unwrap_or(f64::NAN);
        let max_var = r.variances.iter().cloned().fold(0.0f64, f64::max);
        println!("{k:>2} {sse:>12.6} {max_var:>10.6}");
    }

    let report = cluster_db(&db, args.k, args.common.seed, candidates)?;
    let summary = cluster_summary(&report, &db)?;
    println!(
        "{:>7} {:>6} {:>10} {:>9} {:>9} {:>8} {:>7}",
        "cluster", "rep", "energy%", "risk%", "science%", "members", "var"
    );
    for row in &summary {
        println!(
            "{:>7} {:>6} {:>10.2} {:>9.2} {:>9.2} {:>8} {:>7.4}",
            row.cluster,
            row.representative_idx,
            row.energy_pct,
            row.risk_pct,
            row.science_pct,
            row.member_count,
            row.variance
        );
    }

    ensure_out(&args.common.out)?;
    write_json(
        &ClusterOutput { db: args.db.clone(), seed: args.common.seed, report, summary },
        &args.common.out.join("cluster.json"),
    )?;
    write_timings(&args.common.out, "cluster", &[("cluster", t0.elapsed().as_secs_f64() * 1e3)])
}

fn mission_from_spec(
    spec_path: &Path,
    common: &CommonArgs,
) -> Result<(MissionPlan, Vec<CostWeights>)> {
    let spec = MissionSpec::load(spec_path)?;
    let cfg = load_cost_config(&spec.cost_config)?;
    let maps = MapArgs {
        map_dem: spec.dem.clone().expect("load() guarantees dem"),
        map_rock: spec.rock.clone(),
        map_science: spec.science.clone(),
        map_banned: spec.banned.clone(),
        cost_config: None,
    };
    let stack = load_stack(&maps, &cfg)?;

    let weights = if let Some(bound) = spec.energy_bound {
        // Constraint block: sweep each segment, then take the weights of
        // the lexicographic winner under the energy bound.
        let steps = spec.sweep_steps.unwrap_or(10);
        let grid = build_weight_grid(steps, DEFAULT_EPSILON)?;
        let workers = common.effective_workers();
        let mut dbs = Vec::new();
        for pair in spec.waypoints.windows(2) {
            dbs.push(run_sweep(
                &stack,
                &cfg,
                pair[0],
                pair[1],
                &grid,
                workers,
                common.node_time(),
            )?);
        }
        let refs: Vec<&PathDatabase> = dbs.iter().collect();
        let chosen = select_constrained(&refs, bound)?;
        chosen
            .iter()
            .zip(&dbs)
            .map(|(&idx, db)| db.records[idx].weights)
            .collect()
    } else {
        spec.segment_weights.clone()
    };

    let mission = plan_mission(&stack, &cfg, &spec.waypoints, &weights, common.node_time())?;
    Ok((mission, weights))
}

pub fn cmd_mission(args: &MissionArgs) -> Result<()> {
    let t0 = Instant::now();
    let (mission, weights) = mission_from_spec(&args.spec, &args.common)?;

    ensure_out(&args.common.out)?;
    write_json(&mission, &args.common.out.join("mission.json"))?;
    for (i, w) in weights.iter().enumerate() {
        println!("segment {i}: weights {},{},{}", w.alpha1, w.alpha2, w.alpha3);
    }
    let total: f64 = mission.segments.iter().map(|s| s.total_cost).sum();
    print_cost_table(&mission.aggregate, total);

    if let Some(other) = &args.compare {
        let (mission_b, _) = mission_from_spec(other, &args.common)?;
        let rows = compare_missions(&mission, &mission_b)?;
        println!("{:<15} {:>14} {:>14} {:>8}", "metric", "a", "b", "delta");
        for row in &rows {
            println!(
                "{:<15} {:>14.6} {:>14.6} {:>+7.1}%",
                row.name, row.a, row.b, row.delta_pct
            );
        }
        write_json(&rows, &args.common.out.join("mission_compare.json"))?;
    }
    write_timings(&args.common.out, "mission", &[("mission", t0.elapsed().as_secs_f64() * 1e3)])
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport> {
    let cfg = BenchConfig {
        sizes: args.sizes.clone(),
        trials: args.trials,
        weight_triples: args.triples,
        seed: args.common.seed,
    };
    let report = run_bench(&cfg, &CostConfig::default())?;
    println!(
        "{:>6} {:>10} {:>10} {:>10} {:>10}",
        "size", "n_pixel", "init ms", "search ms", "total ms"
    );
    for row in &report.rows {
        println!(
            "{:>6} {:>10} {:>10.3} {:>10.3} {:>10.3}",
            row.size, row.n_pixel, row.init_ms, row.search_ms, row.total_ms
        );
    }
    println!(
        "fit: t = {:.6e} ms/pixel * n_pixel + {:.3} ms, R^2 = {:.4} ({})",
        report.slope_a_ms_per_pixel,
        report.intercept_b_ms,
        report.r_squared,
        if report.r_squared >= 0.9 { "pass" } else { "FAIL" }
    );
    ensure_out(&args.common.out)?;
    // Bench output is timing data by nature; it is never a golden file.
    write_json(&report, &args.common.out.join("bench.json"))?;
    Ok(report)
}

pub fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let params = SynthParams {
        n_rows: args.size,
        n_cols: args.size,
        cell_size: args.cell_size,
        seed: args.common.seed,
        roughness: args.roughness,
        rock_density: args.rock_density,
        hotspots: args.hotspots,
    };
    ensure_out(&args.common.out)?;
    let paths = write_synth_layers(&params, &args.common.out)?;
    for p in &paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Mission(a) => cmd_mission(a),
        Command::Bench(a) => cmd_bench(a).map(|_| ()),
        Command::Render(a) => render_cmd::cmd_render(a),
        Command::Synth(a) => cmd_synth(a),
    }
}
