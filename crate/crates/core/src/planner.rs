//! Deterministic A* over the 8-connected grid. Zero-heuristic mode is
//! plain Dijkstra and serves as the optimality oracle in tests.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::cost::{edge_cost, CostWeights, EdgeCostBreakdown, NormalizationConstants};
use crate::error::{PlannerError, Result};
use crate::raster::{Cell, MapStack, DIRS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicMode {
    Admissible,
    Zero,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlanRequest {
    pub start: Cell,
    pub goal: Cell,
    pub weights: CostWeights,
    pub heuristic_mode: HeuristicMode,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawPath {
    pub cells: Vec<Cell>,
    pub edge_breakdowns: Vec<EdgeCostBreakdown>,
    pub total_cost: f64,
}

impl RawPath {
    pub fn length_m(&self, stack: &MapStack) -> f64 {
        self.cells
            .windows(2)
            .map(|w| stack.geometry.step_distance(w[0], w[1]).unwrap_or(0.0))
            .sum()
    }
}

/// Search statistics alongside the path.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PlanStats {
    pub expanded: usize,
}

#[derive(Clone, Debug)]
pub struct PlanOutcome {
    pub path: RawPath,
    pub stats: PlanStats,
}

/// Lower bound on the remaining cost: minimal weighted cost per meter
/// times the straight-line distance to the goal. Science and banned terms
/// are excluded; only energy and risk scale with distance.
pub fn heuristic(cell: Cell, goal: Cell, norms: &NormalizationConstants, stack: &MapStack) -> f64 {
    norms.h_min_per_meter * stack.geometry.euclid_distance(cell, goal)
}

// Heap entry; min by f, ties by smaller g, then insertion sequence.
struct OpenEntry {
    f: f64,
    g: f64,
    seq: u64,
    idx: u32,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for OpenEntry {}
impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OpenEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the smallest on top.
        other
            .f
            .total_cmp(&self.f)
            .then(other.g.total_cmp(&self.g))
            .then(other.seq.cmp(&self.seq))
    }
}

pub fn plan(stack: &MapStack, request: &PlanRequest, norms: &NormalizationConstants) -> Result<PlanOutcome> {
    let g = &stack.geometry;
    for &endpoint in [&request.start, &request.goal] {
        if !g.contains(endpoint) || stack.is_banned(endpoint) {
            return Err(PlannerError::BadEndpoint(endpoint));
        }
    }
    let h = |cell: Cell| match request.heuristic_mode {
        HeuristicMode::Admissible => heuristic(cell, request.goal, norms, stack),
        HeuristicMode::Zero => 0.0,
    };

    if request.start == request.goal {
        return Ok(PlanOutcome {
            path: RawPath {
                cells: vec![request.start],
                edge_breakdowns: Vec::new(),
                total_cost: 0.0,
            },
            stats: PlanStats { expanded: 0 },
        });
    }

    let n = g.n_cells();
    let mut g_cost = vec![f64::INFINITY; n];
    let mut closed = vec![false; n];
    const NO_PARENT: u32 = u32::MAX;
    let mut parent = vec![NO_PARENT; n];
    let mut open = BinaryHeap::new();
    let mut seq: u64 = 0;
    let start_idx = g.index(request.start);
    let goal_idx = g.index(request.goal);
    g_cost[start_idx] = 0.0;
    open.push(OpenEntry { f: h(request.start), g: 0.0, seq, idx: start_idx as u32 });

    let mut expanded = 0usize;
    let mut reached = false;
    while let Some(entry) = open.pop() {
        let idx = entry.idx as usize;
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        expanded += 1;
        if idx == goal_idx {
            reached = true;
            break;
        }
        let cell = Cell::new(idx / g.n_cols, idx % g.n_cols);
        for d in DIRS {
            let Some(next) = g.neighbor(cell, d) else { continue };
            let next_idx = g.index(next);
            if closed[next_idx] || stack.is_banned(next) {
                continue;
            }
            let bd = edge_cost(stack, cell, next, &request.weights, norms)?;
            let tentative = g_cost[idx] + bd.weighted_total;
            if tentative < g_cost[next_idx] {
                g_cost[next_idx] = tentative;
                parent[next_idx] = idx as u32;
                seq += 1;
                open.push(OpenEntry {
                    f: tentative + h(next),
                    g: tentative,
                    seq,
                    idx: next_idx as u32,
                });
            }
        }
    }

    if !reached {
        return Err(PlannerError::NoPath(request.start, request.goal));
    }

    // Walk parent links back to the start.
    let mut cells = Vec::new();
    let mut idx = goal_idx;
    loop {
        cells.push(Cell::new(idx / g.n_cols, idx % g.n_cols));
        if idx == start_idx {
            break;
        }
        let p = parent[idx];
        if p == NO_PARENT || cells.len() > n {
            return Err(PlannerError::Internal("broken parent chain".into()));
        }
        idx = p as usize;
    }
    cells.reverse();

    let path = build_path(stack, &request.weights, norms, cells)?;
    let rel = (path.total_cost - g_cost[goal_idx]).abs() / g_cost[goal_idx].abs().max(1e-30);
    if path.total_cost != g_cost[goal_idx] && rel > 1e-9 {
        return Err(PlannerError::Internal(format!(
            "reconstructed cost {} disagrees with accumulated cost {}",
            path.total_cost, g_cost[goal_idx]
        )));
    }
    Ok(PlanOutcome { path, stats: PlanStats { expanded } })
}

/// Rebuild a path from an explicit predecessor map (the map-less variant
/// of what `plan` does internally); walks from the goal to the chain root.
pub fn reconstruct(
    stack: &MapStack,
    weights: &CostWeights,
    norms: &NormalizationConstants,
    parents: &HashMap<Cell, Cell>,
    goal: Cell,
) -> Result<RawPath> {
    let mut cells = vec![goal];
    let mut cur = goal;
    while let Some(&p) = parents.get(&cur) {
        cells.push(p);
        cur = p;
        if cells.len() > stack.geometry.n_cells() {
            return Err(PlannerError::Internal("cycle in parent map".into()));
        }
    }
    cells.reverse();
    build_path(stack, weights, norms, cells)
}

/// Attach per-edge breakdowns and the summed cost to an ordered cell list.
pub fn build_path(
    stack: &MapStack,
    weights: &CostWeights,
    norms: &NormalizationConstants,
    cells: Vec<Cell>,
) -> Result<RawPath> {
    let mut edge_breakdowns = Vec::with_capacity(cells.len().saturating_sub(1));
    let mut total_cost = 0.0;
    for w in cells.windows(2) {
        let bd = edge_cost(stack, w[0], w[1], weights, norms)?;
        total_cost += bd.weighted_total;
        edge_breakdowns.push(bd);
    }
    Ok(RawPath { cells, edge_breakdowns, total_cost })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{compute_norms, energy_cost, CostConfig};
    use crate::raster::{assemble_stack, BanLimits, GridGeometry, LayerKind, MapLayer};

    fn flat_stack(n: usize) -> MapStack {
        let geometry = GridGeometry {
            n_rows: n,
            n_cols: n,
            cell_size: 8.0,
            origin: (0.0, 0.0),
            nodata: -9999.0,
        };
        let elev = MapLayer { kind: LayerKind::Elevation, geometry, values: vec![0.0; n * n] };
        assemble_stack(vec![elev], &BanLimits::default()).unwrap()
    }

    #[test]
    fn start_equals_goal_degenerate_plan() {
        let stack = flat_stack(4);
        let cfg = CostConfig::default();
        let norms = compute_norms(&stack, &CostWeights::ENERGY_ONLY, &cfg).unwrap();
        let out = plan(
            &stack,
            &PlanRequest {
                start: Cell::new(1, 1),
                goal: Cell::new(1, 1),
                weights: CostWeights::ENERGY_ONLY,
                heuristic_mode: HeuristicMode::Admissible,
            },
            &norms,
        )
        .unwrap();
        assert_eq!(out.path.cells.len(), 1);
        assert_eq!(out.path.total_cost, 0.0);
    }

    #[test]
    fn uniform_map_same_row_is_straight_axis_path() {
        let stack = flat_stack(8);
        let cfg = CostConfig::default();
        let norms = compute_norms(&stack, &CostWeights::ENERGY_ONLY, &cfg).unwrap();
        let out = plan(
            &stack,
            &PlanRequest {
                start: Cell::new(3, 1),
                goal: Cell::new(3, 6),
                weights: CostWeights::ENERGY_ONLY,
                heuristic_mode: HeuristicMode::Admissible,
            },
            &norms,
        )
        .unwrap();
        assert_eq!(out.path.cells.len(), 6);
        assert!(out.path.cells.iter().all(|c| c.row == 3));
        let per_edge = energy_cost(0.0, 0.0, 8.0, &norms);
        let expected = 5.0 * per_edge;
        assert!((out.path.total_cost - expected).abs() < 1e-12);
    }

    #[test]
    fn banned_endpoint_is_an_error() {
        let mut stack = flat_stack(4);
        stack.banned[0] = true;
        let cfg = CostConfig::default();
        let norms = compute_norms(&stack, &CostWeights::ENERGY_ONLY, &cfg).unwrap();
        let err = plan(
            &stack,
            &PlanRequest {
                start: Cell::new(0, 0),
                goal: Cell::new(3, 3),
                weights: CostWeights::ENERGY_ONLY,
                heuristic_mode: HeuristicMode::Admissible,
            },
            &norms,
        )
        .unwrap_err();
        assert!(matches!(err, PlannerError::BadEndpoint(_)));
    }

    #[test]
    fn unreachable_goal_is_no_path() {
        let mut stack = flat_stack(5);
        // Wall of banned cells across column 2.
        for row in 0..5 {
            stack.banned[row * 5 + 2] = true;
        }
        let cfg = CostConfig::default();
        let norms = compute_norms(&stack, &CostWeights::ENERGY_ONLY, &cfg).unwrap();
        let err = plan(
            &stack,
            &PlanRequest {
                start: Cell::new(2, 0),
                goal: Cell::new(2, 4),
                weights: CostWeights::ENERGY_ONLY,
                heuristic_mode: HeuristicMode::Admissible,
            },
            &norms,
        )
        .unwrap_err();
        assert!(matches!(err, PlannerError::NoPath(_, _)));
    }

    #[test]
    fn reconstruct_single_link_chain() {
        let stack = flat_stack(4);
        let cfg = CostConfig::default();
        let norms = compute_norms(&stack, &CostWeights::ENERGY_ONLY, &cfg).unwrap();
        let mut parents = HashMap::new();
        parents.insert(Cell::new(0, 1), Cell::new(0, 0));
        let path = reconstruct(&stack, &CostWeights::ENERGY_ONLY, &norms, &parents, Cell::new(0, 1))
            .unwrap();
        assert_eq!(path.cells, vec![Cell::new(0, 0), Cell::new(0, 1)]);
        assert_eq!(path.edge_breakdowns.len(), 1);
    }

    #[test]
    fn reconstruct_detects_cycles() {
        let stack = flat_stack(4);
        let cfg = CostConfig::default();
        let norms = compute_norms(&stack, &CostWeights::ENERGY_ONLY, &cfg).unwrap();
        let mut parents = HashMap::new();
        parents.insert(Cell::new(0, 1), Cell::new(0, 0));
        parents.insert(Cell::new(0, 0), Cell::new(0, 1));
        let err = reconstruct(&stack, &CostWeights::ENERGY_ONLY, &norms, &parents, Cell::new(0, 1))
            .unwrap_err();
        assert!(matches!(err, PlannerError::Internal(_)));
    }

    #[test]
    fn heuristic_zero_at_goal_and_without_distance_terms() {
        let stack = flat_stack(4);
        let cfg = CostConfig::default();
        let goal = Cell::new(3, 3);
        let norms = compute_norms(&stack, &CostWeights::SCIENCE_ONLY, &cfg).unwrap();
        assert_eq!(heuristic(goal, goal, &norms, &stack), 0.0);
        // Science-only weights have no distance-dependent term.
        assert_eq!(heuristic(Cell::new(0, 0), goal, &norms, &stack), 0.0);
    }

    #[test]
    fn identical_runs_produce_identical_cells() {
        let stack = flat_stack(8);
        let cfg = CostConfig::default();
        let weights = CostWeights::new(0.5, 0.2, 0.3).unwrap();
        let norms = compute_norms(&stack, &weights, &cfg).unwrap();
        let req = PlanRequest {
            start: Cell::new(0, 0),
            goal: Cell::new(7, 5),
            weights,
            heuristic_mode: HeuristicMode::Admissible,
        };
        let a = plan(&stack, &req, &norms).unwrap();
        let b = plan(&stack, &req, &norms).unwrap();
        assert_eq!(a.path.cells, b.path.cells);
    }
}
