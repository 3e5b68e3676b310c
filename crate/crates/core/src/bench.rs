//! Runtime benchmark over a ladder of synthetic map sizes with a linear
//! time-vs-pixel fit. Fit constants are hardware-specific and reported,
//! never asserted.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cost::{compute_norms, CostConfig, CostWeights};
use crate::error::{PlannerError, Result};
use crate::planner::{plan, HeuristicMode, PlanRequest};
use crate::raster::{assemble_stack, Cell, MapStack};
use crate::sweep::{build_weight_grid, DEFAULT_EPSILON};
use crate::synth::{synth_layers, SynthParams};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    /// Random endpoint pairs per size.
    pub trials: usize,
    /// Weight triples per endpoint pair.
    pub weight_triples: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![64, 128, 256, 512],
            trials: 5,
            weight_triples: 5,
            seed: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub n_pixel: usize,
    /// Map assembly + normalizer initialization, mean per plan.
    pub init_ms: f64,
    /// A* search, mean per plan.
    pub search_ms: f64,
    pub total_ms: f64,
    pub plans: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    /// time = a * n_pixel + b, in milliseconds.
    pub slope_a_ms_per_pixel: f64,
    pub intercept_b_ms: f64,
    pub r_squared: f64,
}

fn pick_unbanned(stack: &MapStack, rng: &mut ChaCha8Rng) -> Option<Cell> {
    let g = &stack.geometry;
    for _ in 0..10_000 {
        let cell = Cell::new(rng.gen_range(0..g.n_rows), rng.gen_range(0..g.n_cols));
        if !stack.is_banned(cell) {
            return Some(cell);
        }
    }
    None
}

pub fn run_bench(cfg: &BenchConfig, cost_cfg: &CostConfig) -> Result<BenchReport> {
    if cfg.sizes.len() < 2 {
        return Err(PlannerError::Config(
            "bench needs at least 2 map sizes to fit a line".into(),
        ));
    }
    let weight_grid = build_weight_grid(cfg.weight_triples.max(2), DEFAULT_EPSILON)?;
    // Spread the triples across the simplex, not just near one corner.
    let stride = weight_grid.triples.len() / cfg.weight_triples.max(1);
    let triples: Vec<CostWeights> = (0..cfg.weight_triples)
        .map(|i| weight_grid.triples[(i * stride).min(weight_grid.triples.len() - 1)])
        .collect();

    let mut rows = Vec::with_capacity(cfg.sizes.len());
    for (size_idx, &size) in cfg.sizes.iter().enumerate() {
        let params = SynthParams {
            n_rows: size,
            n_cols: size,
            seed: cfg.seed.wrapping_add(size_idx as u64),
            roughness: 0.4,
            rock_density: 0.3,
            hotspots: 3,
            ..SynthParams::default()
        };
        let layers = synth_layers(&params);
        let stack = assemble_stack(layers.to_vec(), &cost_cfg.ban_limits())?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1000 + size_idx as u64));

        let mut init_ms = 0.0;
        let mut search_ms = 0.0;
        let mut plans = 0usize;
        for _ in 0..cfg.trials {
            let (Some(start), Some(goal)) =
                (pick_unbanned(&stack, &mut rng), pick_unbanned(&stack, &mut rng))
            else {
                continue;
            };
            for &weights in &triples {
                let t0 = Instant::now();
                let norms = compute_norms(&stack, &weights, cost_cfg)?;
                let t1 = Instant::now();
                let request = PlanRequest {
                    start,
                    goal,
                    weights,
                    heuristic_mode: HeuristicMode::Admissible,
                };
                // Unreachable pairs still measure a full frontier exhaustion.
                let _ = plan(&stack, &request, &norms);
                let t2 = Instant::now();
                init_ms += (t1 - t0).as_secs_f64() * 1e3;
                search_ms += (t2 - t1).as_secs_f64() * 1e3;
                plans += 1;
            }
        }
        if plans == 0 {
            return Err(PlannerError::FullyBanned);
        }
        let n = plans as f64;
        rows.push(BenchRow {
            size,
            n_pixel: size * size,
            init_ms: init_ms / n,
            search_ms: search_ms / n,
            total_ms: (init_ms + search_ms) / n,
            plans,
        });
    }

    let (a, b, r2) = linear_fit(
        &rows.iter().map(|r| r.n_pixel as f64).collect::<Vec<_>>(),
        &rows.iter().map(|r| r.total_ms).collect::<Vec<_>>(),
    );
    Ok(BenchReport {
        rows,
        slope_a_ms_per_pixel: a,
        intercept_b_ms: b,
        r_squared: r2,
    })
}

/// Least squares y = a x + b with the coefficient of determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mean_x).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(u, v)| (u - mean_x) * (v - mean_y)).sum();
    let a = sxy / sxx;
    let b = mean_y - a * mean_x;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(u, v)| (v - (a * u + b)).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    (a, b, r2)
}
