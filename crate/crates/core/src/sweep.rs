//! Weight-simplex sweep: plan one path per weight combination and persist
//! the resulting database.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cost::{compute_norms, CostConfig, CostWeights};
use crate::error::{PlannerError, Result};
use crate::evaluator::{evaluate, NodeTime, PathMetrics};
use crate::planner::{plan, HeuristicMode, PlanRequest, RawPath};
use crate::raster::{Cell, Dir, MapStack};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightGrid {
    pub step_count: usize,
    pub epsilon: f64,
    pub triples: Vec<CostWeights>,
}

pub const DEFAULT_EPSILON: f64 = 1e-2;

/// step_count^3 log-spaced raw triples normalized onto the simplex, plus
/// the three exact corner triples appended at the end (log spacing can
/// never reach an exact zero weight).
pub fn build_weight_grid(step_count: usize, epsilon: f64) -> Result<WeightGrid> {
    if step_count < 2 {
        return Err(PlannerError::Config("step_count must be at least 2".into()));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(PlannerError::Config("epsilon must lie in (0, 1)".into()));
    }
    let ln_eps = epsilon.ln();
    let axis: Vec<f64> = (0..step_count)
        .map(|i| {
            let t = i as f64 / (step_count - 1) as f64;
            (ln_eps * (1.0 - t)).exp()
        })
        .collect();
    let mut triples = Vec::with_capacity(step_count.pow(3) + 3);
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                triples.push(normalized_weights(a, b, c)?);
            }
        }
    }
    triples.push(CostWeights::ENERGY_ONLY);
    triples.push(CostWeights::RISK_ONLY);
    triples.push(CostWeights::SCIENCE_ONLY);
    Ok(WeightGrid { step_count, epsilon, triples })
}

// Project a raw triple onto the simplex; the third component absorbs the
// rounding so the sum is exactly 1.
fn normalized_weights(a: f64, b: f64, c: f64) -> Result<CostWeights> {
    let sum = a + b + c;
    CostWeights::new(a / sum, b / sum, 1.0 - a / sum - b / sum)
}

/// Drop triples equal to an earlier one within 1e-12 per component.
pub fn dedupe_grid(grid: &mut WeightGrid) {
    let mut kept: Vec<CostWeights> = Vec::with_capacity(grid.triples.len());
    for &t in &grid.triples {
        let dup = kept.iter().any(|k| {
            (k.alpha1 - t.alpha1).abs() <= 1e-12
                && (k.alpha2 - t.alpha2).abs() <= 1e-12
                && (k.alpha3 - t.alpha3).abs() <= 1e-12
        });
        if !dup {
            kept.push(t);
        }
    }
    grid.triples = kept;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordStatus {
    Ok,
    NoPath,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRecord {
    pub idx: usize,
    pub weights: CostWeights,
    pub status: RecordStatus,
    pub cost_e: f64,
    pub cost_r: f64,
    pub cost_i: f64,
    pub cost_total: f64,
    pub length_m: f64,
    pub energy_rel: f64,
    pub risk_total: f64,
    pub science_total: f64,
    pub path_rle: String,
}

impl SweepRecord {
    pub fn failure(idx: usize, weights: CostWeights) -> SweepRecord {
        SweepRecord {
            idx,
            weights,
            status: RecordStatus::NoPath,
            cost_e: f64::NAN,
            cost_r: f64::NAN,
            cost_i: f64::NAN,
            cost_total: f64::NAN,
            length_m: f64::NAN,
            energy_rel: f64::NAN,
            risk_total: f64::NAN,
            science_total: f64::NAN,
            path_rle: String::new(),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == RecordStatus::Ok
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathDatabase {
    pub map_id: String,
    pub start: Cell,
    pub goal: Cell,
    pub records: Vec<SweepRecord>,
}

/// Content hash binding a database to its map stack and cost config.
pub fn map_id(stack: &MapStack, cfg: &CostConfig) -> String {
    let mut hasher = Sha256::new();
    let g = &stack.geometry;
    hasher.update(g.n_rows.to_le_bytes());
    hasher.update(g.n_cols.to_le_bytes());
    hasher.update(g.cell_size.to_le_bytes());
    hasher.update(g.origin.0.to_le_bytes());
    hasher.update(g.origin.1.to_le_bytes());
    for layer in [&stack.elevation, &stack.rock, &stack.science] {
        for v in layer {
            hasher.update(v.to_le_bytes());
        }
    }
    for &b in &stack.banned {
        hasher.update([b as u8]);
    }
    for poly in [&cfg.energy, &cfg.crash] {
        for p in poly.p {
            hasher.update(p.to_le_bytes());
        }
    }
    for v in [cfg.d_sim, cfg.velocity, cfg.max_slope_deg, cfg.max_rock] {
        hasher.update(v.to_le_bytes());
    }
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run-length encode a cell path by step direction: `row,col:` followed by
/// `<DIR><count>` runs, e.g. `3,4:N2NE5`.
pub fn encode_path_rle(cells: &[Cell]) -> String {
    let Some(first) = cells.first() else {
        return String::new();
    };
    let mut out = format!("{},{}:", first.row, first.col);
    let mut run: Option<(Dir, usize)> = None;
    for w in cells.windows(2) {
        let d = Dir::between(w[0], w[1]).expect("path cells must be 8-neighbors");
        run = match run {
            Some((prev, n)) if prev == d => Some((prev, n + 1)),
            Some((prev, n)) => {
                out.push_str(prev.letter());
                out.push_str(&n.to_string());
                Some((d, 1))
            }
            None => Some((d, 1)),
        };
    }
    if let Some((d, n)) = run {
        out.push_str(d.letter());
        out.push_str(&n.to_string());
    }
    out
}

pub fn decode_path_rle(s: &str) -> Result<Vec<Cell>> {
    let bad = |msg: &str| PlannerError::Config(format!("bad path encoding `{s}`: {msg}"));
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let (head, runs) = s.split_once(':').ok_or_else(|| bad("missing `:`"))?;
    let (r, c) = head.split_once(',').ok_or_else(|| bad("missing start cell"))?;
    let mut cur = Cell::new(
        r.parse().map_err(|_| bad("bad start row"))?,
        c.parse().map_err(|_| bad("bad start col"))?,
    );
    let mut cells = vec![cur];
    let mut chars = runs.chars().peekable();
    while chars.peek().is_some() {
        let mut letters = String::new();
        while chars.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            letters.push(chars.next().unwrap());
        }
        let mut digits = String::new();
        while chars.peek().is_some_and(|c| c.is_ascii_digit()) {
            digits.push(chars.next().unwrap());
        }
        let dir = Dir::from_letter(&letters).ok_or_else(|| bad("unknown direction"))?;
        let count: usize = digits.parse().map_err(|_| bad("bad run length"))?;
        let (dr, dc) = dir.delta();
        for _ in 0..count {
            cur = Cell::new(
                cur.row.checked_add_signed(dr).ok_or_else(|| bad("row underflow"))?,
                cur.col.checked_add_signed(dc).ok_or_else(|| bad("col underflow"))?,
            );
            cells.push(cur);
        }
    }
    Ok(cells)
}

/// One record per weight triple, in grid order regardless of worker count.
/// Normalizers are recomputed per triple: the heuristic slope depends on
/// the weights. Failures stay in the database as explicit records.
pub fn run_sweep(
    stack: &MapStack,
    cfg: &CostConfig,
    start: Cell,
    goal: Cell,
    grid: &WeightGrid,
    workers: usize,
    node_time: NodeTime,
) -> Result<PathDatabase> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| PlannerError::Internal(format!("thread pool: {e}")))?;

    let records: Vec<SweepRecord> = pool.install(|| {
        grid.triples
            .par_iter()
            .enumerate()
            .map(|(idx, &weights)| sweep_one(stack, cfg, start, goal, weights, idx, node_time))
            .collect()
    });

    if records.iter().all(|r| !r.is_ok()) {
        return Err(PlannerError::AllTriplesFailed);
    }

    Ok(PathDatabase {
        map_id: map_id(stack, cfg),
        start,
        goal,
        records,
    })
}

fn sweep_one(
    stack: &MapStack,
    cfg: &CostConfig,
    start: Cell,
    goal: Cell,
    weights: CostWeights,
    idx: usize,
    node_time: NodeTime,
) -> SweepRecord {
    let outcome = compute_norms(stack, &weights, cfg).and_then(|norms| {
        let request = PlanRequest {
            start,
            goal,
            weights,
            heuristic_mode: HeuristicMode::Admissible,
        };
        plan(stack, &request, &norms).map(|out| (out.path, norms))
    });
    match outcome {
        Ok((path, norms)) => record_from_path(idx, weights, &path, stack, &norms, node_time),
        Err(_) => SweepRecord::failure(idx, weights),
    }
}

pub fn record_from_path(
    idx: usize,
    weights: CostWeights,
    path: &RawPath,
    stack: &MapStack,
    norms: &crate::cost::NormalizationConstants,
    node_time: NodeTime,
) -> SweepRecord {
    let metrics: PathMetrics = evaluate(path, stack, norms, node_time);
    SweepRecord {
        idx,
        weights,
        status: RecordStatus::Ok,
        cost_e: metrics.component_costs.0,
        cost_r: metrics.component_costs.1,
        cost_i: metrics.component_costs.2,
        cost_total: path.total_cost,
        length_m: metrics.length_m,
        energy_rel: metrics.energy_rel,
        risk_total: metrics.risk_total,
        science_total: metrics.science_total,
        path_rle: encode_path_rle(&path.cells),
    }
}

pub const CSV_HEADER: [&str; 14] = [
    "idx",
    "alpha1",
    "alpha2",
    "alpha3",
    "cost_E",
    "cost_R",
    "cost_I",
    "cost_total",
    "length_m",
    "energy_rel",
    "risk_total",
    "science_total",
    "status",
    "path_rle",
];

pub fn write_csv(db: &PathDatabase, path: &Path) -> Result<()> {
    let io_err = |source| PlannerError::Io { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => io_err(source),
        other => PlannerError::Internal(format!("csv: {other:?}")),
    })?;
    w.write_record(CSV_HEADER).map_err(csv_internal)?;
    let num = |v: f64| if v.is_nan() { String::new() } else { format!("{v}") };
    for r in &db.records {
        let status = match r.status {
            RecordStatus::Ok => "ok",
            RecordStatus::NoPath => "no_path",
        };
        w.write_record([
            r.idx.to_string(),
            format!("{}", r.weights.alpha1),
            format!("{}", r.weights.alpha2),
            format!("{}", r.weights.alpha3),
            num(r.cost_e),
            num(r.cost_r),
            num(r.cost_i),
            num(r.cost_total),
            num(r.length_m),
            num(r.energy_rel),
            num(r.risk_total),
            num(r.science_total),
            status.to_string(),
            r.path_rle.clone(),
        ])
        .map_err(csv_internal)?;
    }
    w.flush().map_err(|source| io_err(source))?;
    Ok(())
}

fn csv_internal(e: csv::Error) -> PlannerError {
    PlannerError::Internal(format!("csv: {e}"))
}

/// Companion metadata written next to the CSV.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DatabaseMeta {
    pub map_id: String,
    pub start: Cell,
    pub goal: Cell,
    pub step_count: usize,
    pub epsilon: f64,
    pub n_records: usize,
    pub n_failures: usize,
    pub cost_config: CostConfig,
}

pub fn read_csv(path: &Path, map_id: String, start: Cell, goal: Cell) -> Result<PathDatabase> {
    let text = std::fs::read_to_string(path).map_err(|source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let parse_err = |msg: String| PlannerError::Parse { path: path.to_path_buf(), msg };
    let mut records = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| parse_err(e.to_string()))?;
        let field = |i: usize| -> Result<&str> {
            row.get(i).ok_or_else(|| parse_err(format!("missing column {i}")))
        };
        let num = |i: usize| -> Result<f64> {
            let s = field(i)?;
            if s.is_empty() {
                Ok(f64::NAN)
            } else {
                s.parse().map_err(|e| parse_err(format!("column {i}: {e}")))
            }
        };
        let status = match field(12)? {
            "ok" => RecordStatus::Ok,
            "no_path" => RecordStatus::NoPath,
            other => return Err(parse_err(format!("unknown status `{other}`"))),
        };
        records.push(SweepRecord {
            idx: field(0)?.parse().map_err(|e| parse_err(format!("idx: {e}")))?,
            weights: CostWeights {
                alpha1: num(1)?,
                alpha2: num(2)?,
                alpha3: num(3)?,
            },
            status,
            cost_e: num(4)?,
            cost_r: num(5)?,
            cost_i: num(6)?,
            cost_total: num(7)?,
            length_m: num(8)?,
            energy_rel: num(9)?,
            risk_total: num(10)?,
            science_total: num(11)?,
            path_rle: field(13)?.to_string(),
        });
    }
    Ok(PathDatabase { map_id, start, goal, records })
}
