//! Waypoint-segmented mission planning: per-segment optimal paths,
//! constraint-driven weight selection, and mission comparison.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cost::{compute_norms, CostConfig, CostWeights};
use crate::error::{PlannerError, Result};
use crate::evaluator::{evaluate, NodeTime, PathMetrics};
use crate::planner::{plan, HeuristicMode, PlanRequest, RawPath};
use crate::raster::{Cell, MapStack};
use crate::sweep::PathDatabase;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MissionPlan {
    pub map_id: String,
    pub waypoints: Vec<Cell>,
    pub segment_weights: Vec<CostWeights>,
    pub segments: Vec<RawPath>,
    pub aggregate: PathMetrics,
}

/// Plan each consecutive waypoint pair independently and aggregate the
/// metrics over the concatenation. Shared waypoint nodes count once in
/// the science average.
pub fn plan_mission(
    stack: &MapStack,
    cfg: &CostConfig,
    waypoints: &[Cell],
    weights_per_segment: &[CostWeights],
    node_time: NodeTime,
) -> Result<MissionPlan> {
    if waypoints.len() < 2 {
        return Err(PlannerError::Config("a mission needs at least 2 waypoints".into()));
    }
    if weights_per_segment.len() != waypoints.len() - 1 {
        return Err(PlannerError::Config(format!(
            "{} waypoints define {} segments but {} weight triples were given",
            waypoints.len(),
            waypoints.len() - 1,
            weights_per_segment.len()
        )));
    }

    let mut segments = Vec::with_capacity(waypoints.len() - 1);
    for (pair, &weights) in waypoints.windows(2).zip(weights_per_segment) {
        let norms = compute_norms(stack, &weights, cfg)?;
        let request = PlanRequest {
            start: pair[0],
            goal: pair[1],
            weights,
            heuristic_mode: HeuristicMode::Admissible,
        };
        segments.push(plan(stack, &request, &norms)?.path);
    }

    // Concatenated edge list; joint waypoints appear once.
    let mut cells = Vec::new();
    let mut breakdowns = Vec::new();
    let mut total_cost = 0.0;
    for (i, seg) in segments.iter().enumerate() {
        let skip = usize::from(i > 0);
        cells.extend_from_slice(&seg.cells[skip..]);
        breakdowns.extend_from_slice(&seg.edge_breakdowns);
        total_cost += seg.total_cost;
    }
    let concatenated = RawPath { cells, edge_breakdowns: breakdowns, total_cost };
    // Any weights give the same norms fields used by evaluate (the
    // heuristic slope is not consulted); use the first segment's.
    let norms = compute_norms(stack, &weights_per_segment[0], cfg)?;
    let aggregate = evaluate(&concatenated, stack, &norms, node_time);

    Ok(MissionPlan {
        map_id: crate::sweep::map_id(stack, cfg),
        waypoints: waypoints.to_vec(),
        segment_weights: weights_per_segment.to_vec(),
        segments,
        aggregate,
    })
}

/// Per segment: keep records within the energy bound, then pick the
/// lexicographic winner (minimal risk, then maximal science, then lowest
/// record index). Returns the chosen record index per segment.
pub fn select_constrained(dbs: &[&PathDatabase], energy_bound: f64) -> Result<Vec<usize>> {
    let mut chosen = Vec::with_capacity(dbs.len());
    for (seg, db) in dbs.iter().enumerate() {
        let winner = db
            .records
            .iter()
            .filter(|r| r.is_ok() && r.energy_rel <= energy_bound)
            .min_by(|a, b| {
                a.risk_total
                    .total_cmp(&b.risk_total)
                    .then(b.science_total.total_cmp(&a.science_total))
                    .then(a.idx.cmp(&b.idx))
            })
            .ok_or(PlannerError::ConstraintInfeasible(seg))?;
        chosen.push(winner.idx);
    }
    Ok(chosen)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub a: f64,
    pub b: f64,
    pub delta_pct: f64,
}

/// Length / Energy / Risk / Science rows with signed percent deltas of
/// plan `b` relative to plan `a`.
pub fn compare_missions(a: &MissionPlan, b: &MissionPlan) -> Result<Vec<ComparisonRow>> {
    if a.map_id != b.map_id {
        return Err(PlannerError::MapIdMismatch(a.map_id.clone(), b.map_id.clone()));
    }
    let row = |name: &str, va: f64, vb: f64| ComparisonRow {
        name: name.to_string(),
        a: va,
        b: vb,
        delta_pct: if va != 0.0 { (vb - va) / va * 100.0 } else { f64::NAN },
    };
    Ok(vec![
        row("length_m", a.aggregate.length_m, b.aggregate.length_m),
        row("energy_rel", a.aggregate.energy_rel, b.aggregate.energy_rel),
        row("risk_total", a.aggregate.risk_total, b.aggregate.risk_total),
        row("science_total", a.aggregate.science_total, b.aggregate.science_total),
    ])
}

/// Mission specification file: key-value lines, `waypoint` and `weights`
/// repeatable. Instead of explicit weights, a constraint block
/// (`energy_bound`, optional `sweep_steps`) lets each segment pick its
/// weights from a sweep database via [`select_constrained`].
#[derive(Clone, Debug, Default)]
pub struct MissionSpec {
    pub dem: Option<PathBuf>,
    pub rock: Option<PathBuf>,
    pub science: Option<PathBuf>,
    pub banned: Option<PathBuf>,
    pub cost_config: Option<PathBuf>,
    pub waypoints: Vec<Cell>,
    pub segment_weights: Vec<CostWeights>,
    pub energy_bound: Option<f64>,
    pub sweep_steps: Option<usize>,
}

impl MissionSpec {
    pub fn load(path: &Path) -> Result<MissionSpec> {
        let text = std::fs::read_to_string(path).map_err(|source| PlannerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut spec = MissionSpec::default();
        let base = path.parent().unwrap_or(Path::new("."));
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| PlannerError::Config(format!(
                "{}:{}: {msg}",
                path.display(),
                lineno + 1
            ));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let key = key.trim();
            let value = value.trim();
            let rel = || base.join(value);
            match key {
                "dem" => spec.dem = Some(rel()),
                "rock" => spec.rock = Some(rel()),
                "science" => spec.science = Some(rel()),
                "banned" => spec.banned = Some(rel()),
                "cost_config" => spec.cost_config = Some(rel()),
                "waypoint" => {
                    let (r, c) = value
                        .split_once(',')
                        .ok_or_else(|| err("waypoint must be `row,col`".into()))?;
                    spec.waypoints.push(Cell::new(
                        r.trim().parse().map_err(|e| err(format!("row: {e}")))?,
                        c.trim().parse().map_err(|e| err(format!("col: {e}")))?,
                    ));
                }
                "weights" => {
                    let parts: Vec<&str> = value.split(',').collect();
                    if parts.len() != 3 {
                        return Err(err("weights must be `a1,a2,a3`".into()));
                    }
                    let mut vals = [0.0f64; 3];
                    for (slot, part) in vals.iter_mut().zip(&parts) {
                        *slot = part.trim().parse().map_err(|e| err(format!("weight: {e}")))?;
                    }
                    spec.segment_weights
                        .push(CostWeights::new(vals[0], vals[1], vals[2])?);
                }
                "energy_bound" => {
                    spec.energy_bound =
                        Some(value.parse().map_err(|e| err(format!("energy_bound: {e}")))?)
                }
                "sweep_steps" => {
                    spec.sweep_steps =
                        Some(value.parse().map_err(|e| err(format!("sweep_steps: {e}")))?)
                }
                other => return Err(err(format!("unknown key `{other}`"))),
            }
        }
        if spec.dem.is_none() {
            return Err(PlannerError::Config(format!(
                "{}: missing `dem` entry",
                path.display()
            )));
        }
        if spec.waypoints.len() < 2 {
            return Err(PlannerError::Config(format!(
                "{}: need at least 2 waypoints",
                path.display()
            )));
        }
        let n_segments = spec.waypoints.len() - 1;
        if spec.energy_bound.is_some() {
            if !spec.segment_weights.is_empty() {
                return Err(PlannerError::Config(format!(
                    "{}: give either `weights` lines or an `energy_bound`, not both",
                    path.display()
                )));
            }
            return Ok(spec);
        }
        // A single weights line applies to every segment.
        if spec.segment_weights.len() == 1 && n_segments > 1 {
            spec.segment_weights = vec![spec.segment_weights[0]; n_segments];
        }
        if spec.segment_weights.len() != n_segments {
            return Err(PlannerError::Config(format!(
                "{}: {} segments but {} weights lines",
                path.display(),
                n_segments,
                spec.segment_weights.len()
            )));
        }
        Ok(spec)
    }
}
