//! Weighted multi-objective edge cost: squared-torque energy, crash risk,
//! science cost, banned penalty, and the map-specific normalizations that
//! make the components comparable.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PlannerError, Result};
use crate::raster::{edge_slope, Cell, MapStack, DIRS};

/// Quadratic surface p0 + p1*s + p2*r + p3*s^2 + p4*s*r + p5*r^2
/// with slope s in degrees and rock abundance r in [0,1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolynomialCoeffs {
    pub p: [f64; 6],
}

impl PolynomialCoeffs {
    pub fn new(p: [f64; 6]) -> Result<Self> {
        if p.iter().any(|v| !v.is_finite()) {
            return Err(PlannerError::Config(
                "polynomial coefficients must be finite".into(),
            ));
        }
        Ok(PolynomialCoeffs { p })
    }

    pub fn eval(&self, s: f64, r: f64) -> f64 {
        let [p0, p1, p2, p3, p4, p5] = self.p;
        p0 + p1 * s + p2 * r + p3 * s * s + p4 * s * r + p5 * r * r
    }
}

/// ANYmal squared-torque coefficients (simulation-fit, taken as given).
pub const ENERGY_COEFFS: PolynomialCoeffs = PolynomialCoeffs {
    p: [803.0, 10.5, 70.3, 0.739, -1.42, 1770.0],
};

/// ANYmal per-8m crash-rate coefficients.
pub const CRASH_COEFFS: PolynomialCoeffs = PolynomialCoeffs {
    p: [-2.88e-2, 5.31e-4, 0.319, 3.14e-4, -2.3e-2, 10.8],
};

/// Simplex weights trading off energy, risk and science.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
}

const WEIGHT_SUM_TOL: f64 = 1e-12;

impl CostWeights {
    pub fn new(alpha1: f64, alpha2: f64, alpha3: f64) -> Result<Self> {
        let in_unit = |a: f64| (0.0..=1.0).contains(&a);
        let sum = alpha1 + alpha2 + alpha3;
        if !in_unit(alpha1) || !in_unit(alpha2) || !in_unit(alpha3)
            || (sum - 1.0).abs() > WEIGHT_SUM_TOL
        {
            return Err(PlannerError::InvalidWeights(alpha1, alpha2, alpha3));
        }
        Ok(CostWeights { alpha1, alpha2, alpha3 })
    }

    pub const ENERGY_ONLY: CostWeights = CostWeights { alpha1: 1.0, alpha2: 0.0, alpha3: 0.0 };
    pub const RISK_ONLY: CostWeights = CostWeights { alpha1: 0.0, alpha2: 1.0, alpha3: 0.0 };
    pub const SCIENCE_ONLY: CostWeights = CostWeights { alpha1: 0.0, alpha2: 0.0, alpha3: 1.0 };
}

/// Robot- and threshold-level configuration; defaults model ANYmal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostConfig {
    pub energy: PolynomialCoeffs,
    pub crash: PolynomialCoeffs,
    /// Grid size of the simulation the coefficients were fit on, meters.
    pub d_sim: f64,
    /// Fixed traverse velocity, m/s.
    pub velocity: f64,
    pub max_slope_deg: f64,
    pub max_rock: f64,
}

impl Default for CostConfig {
    fn default() -> Self {
        CostConfig {
            energy: ENERGY_COEFFS,
            crash: CRASH_COEFFS,
            d_sim: 8.0,
            velocity: 0.8,
            max_slope_deg: 30.0,
            max_rock: 0.3,
        }
    }
}

impl CostConfig {
    /// Parse a key-value config file; unspecified keys keep their defaults.
    /// Recognized keys: energy_p0..p5, crash_p0..p5, d_sim, velocity,
    /// max_slope_deg, max_rock. Lines starting with `#` are comments.
    pub fn load(path: &Path) -> Result<CostConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| PlannerError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = CostConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| PlannerError::Config(
                format!("{}:{}: expected `key = value`", path.display(), lineno + 1),
            ))?;
            let key = key.trim();
            let value: f64 = value.trim().parse().map_err(|e| PlannerError::Config(
                format!("{}:{}: bad value for `{key}`: {e}", path.display(), lineno + 1),
            ))?;
            let poly_coeff = |poly: &mut PolynomialCoeffs, idx: &str| -> Result<()> {
                let i: usize = idx.parse().map_err(|_| PlannerError::Config(
                    format!("unknown key `{key}`"),
                ))?;
                if i > 5 {
                    return Err(PlannerError::Config(format!("unknown key `{key}`")));
                }
                poly.p[i] = value;
                Ok(())
            };
            match key {
                "d_sim" => cfg.d_sim = value,
                "velocity" => cfg.velocity = value,
                "max_slope_deg" => cfg.max_slope_deg = value,
                "max_rock" => cfg.max_rock = value,
                _ if key.starts_with("energy_p") => poly_coeff(&mut cfg.energy, &key[8..])?,
                _ if key.starts_with("crash_p") => poly_coeff(&mut cfg.crash, &key[7..])?,
                _ => {
                    return Err(PlannerError::Config(format!(
                        "{}:{}: unknown key `{key}`",
                        path.display(),
                        lineno + 1
                    )))
                }
            }
        }
        if !(cfg.d_sim > 0.0) || !(cfg.velocity > 0.0) {
            return Err(PlannerError::Config(
                "d_sim and velocity must be positive".into(),
            ));
        }
        Ok(cfg)
    }

    pub fn ban_limits(&self) -> crate::raster::BanLimits {
        crate::raster::BanLimits {
            max_slope_deg: self.max_slope_deg,
            max_rock: self.max_rock,
        }
    }
}

/// Map-specific normalizers, computed once per (map, weights) pair.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NormalizationConstants {
    /// Max squared torque of any feasible edge (diagonal distance).
    pub e_star_max: f64,
    /// Min squared torque of any feasible edge (axis distance).
    pub e_star_min: f64,
    /// Max scaled crash rate of any feasible edge (diagonal distance).
    pub r_star_max: f64,
    /// Min scaled crash rate of any feasible edge (axis distance).
    pub r_star_min: f64,
    /// Extremes of the raw (clamped) per-d_sim crash surface.
    pub crash_raw_min: f64,
    pub crash_raw_max: f64,
    /// Lower bound on weighted cost per traversed meter; heuristic slope.
    pub h_min_per_meter: f64,
    pub d_sim: f64,
    pub velocity: f64,
    pub cell_size: f64,
    pub energy: PolynomialCoeffs,
    pub crash: PolynomialCoeffs,
}

const ENERGY_FLOOR: f64 = 1e-9;

/// Squared torque for traversing distance `d` at slope `s` (degrees) and
/// rock abundance `r`, scaled from the simulation grid size.
pub fn energy_raw(s: f64, r: f64, d: f64, coeffs: &PolynomialCoeffs, d_sim: f64) -> f64 {
    (coeffs.eval(s, r) * d / d_sim).max(ENERGY_FLOOR)
}

/// Per-d_sim crash probability, clamped to [0,1] (the fitted surface dips
/// below zero near the origin).
pub fn crash_rate_raw(s: f64, r: f64, coeffs: &PolynomialCoeffs) -> f64 {
    coeffs.eval(s, r).clamp(0.0, 1.0)
}

/// Crash probability over distance `d`, geometric survival scaling from
/// the per-d_sim rate.
pub fn scale_crash_rate(raw: f64, d: f64, d_sim: f64) -> f64 {
    1.0 - (1.0 - raw).powf(d / d_sim)
}

pub fn crash_rate_scaled(s: f64, r: f64, d: f64, coeffs: &PolynomialCoeffs, d_sim: f64) -> f64 {
    scale_crash_rate(crash_rate_raw(s, r, coeffs), d, d_sim)
}

/// Dimensionless energy cost in (0, 1] for feasible edges.
pub fn energy_cost(s: f64, r: f64, d: f64, norms: &NormalizationConstants) -> f64 {
    energy_raw(s, r, d, &norms.energy, norms.d_sim) / norms.e_star_max
}

/// Dimensionless risk cost in [0, 1]; zero on risk-free maps.
pub fn risk_cost(s: f64, r: f64, d: f64, norms: &NormalizationConstants) -> f64 {
    if norms.r_star_max <= 0.0 {
        return 0.0;
    }
    crash_rate_scaled(s, r, d, &norms.crash, norms.d_sim) / norms.r_star_max
}

/// Complement of scientific interest.
pub fn science_cost(interest: f64) -> f64 {
    1.0 - interest
}

/// Eq-style banned penalty; the planner realizes the infinite branch by
/// never expanding banned cells.
pub fn banned_cost(banned: bool) -> f64 {
    if banned {
        f64::INFINITY
    } else {
        0.0
    }
}

/// All cost components of one directed edge.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct EdgeCostBreakdown {
    pub energy: f64,
    pub risk: f64,
    pub science: f64,
    pub banned: f64,
    pub weighted_total: f64,
}

/// Assemble the weighted edge cost. Slope uses both endpoints; rock,
/// interest and the banned flag are sampled at the destination cell.
pub fn edge_cost(
    stack: &MapStack,
    from: Cell,
    to: Cell,
    weights: &CostWeights,
    norms: &NormalizationConstants,
) -> Result<EdgeCostBreakdown> {
    let d = stack.geometry.step_distance(from, to)?;
    let s = edge_slope(stack, from, to)?;
    let r = stack.rock_at(to);
    let energy = energy_cost(s, r, d, norms);
    let risk = risk_cost(s, r, d, norms);
    let science = science_cost(stack.interest_at(to));
    let banned = banned_cost(stack.is_banned(to));
    let weighted_total = if banned > 0.0 {
        f64::INFINITY
    } else {
        weights.alpha1 * energy + weights.alpha2 * risk + weights.alpha3 * science
    };
    Ok(EdgeCostBreakdown {
        energy,
        risk,
        science,
        banned,
        weighted_total,
    })
}

/// Extrema of a quadratic surface over an axis-aligned rectangle, found
/// closed-form: corners, per-edge stationary points, interior stationary
/// point.
pub fn quad_extrema(
    coeffs: &PolynomialCoeffs,
    s_lo: f64,
    s_hi: f64,
    r_lo: f64,
    r_hi: f64,
) -> (f64, f64) {
    let [_, p1, p2, p3, p4, p5] = coeffs.p;
    let mut candidates: Vec<(f64, f64)> = vec![
        (s_lo, r_lo),
        (s_lo, r_hi),
        (s_hi, r_lo),
        (s_hi, r_hi),
    ];
    // Stationary point of the 1-D restriction along each rectangle edge.
    if p3 != 0.0 {
        for r in [r_lo, r_hi] {
            let s = -(p1 + p4 * r) / (2.0 * p3);
            if s >= s_lo && s <= s_hi {
                candidates.push((s, r));
            }
        }
    }
    if p5 != 0.0 {
        for s in [s_lo, s_hi] {
            let r = -(p2 + p4 * s) / (2.0 * p5);
            if r >= r_lo && r <= r_hi {
                candidates.push((s, r));
            }
        }
    }
    // Interior stationary point: solve grad = 0.
    let det = 4.0 * p3 * p5 - p4 * p4;
    if det != 0.0 {
        let s = (-2.0 * p5 * p1 + p4 * p2) / det;
        let r = (-2.0 * p3 * p2 + p4 * p1) / det;
        if s >= s_lo && s <= s_hi && r >= r_lo && r <= r_hi {
            candidates.push((s, r));
        }
    }
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for (s, r) in candidates {
        let v = coeffs.eval(s, r);
        min = min.min(v);
        max = max.max(v);
    }
    (min, max)
}

/// Compute the map-specific normalizers over the feasible (post-ban)
/// slope/rock domain.
pub fn compute_norms(
    stack: &MapStack,
    weights: &CostWeights,
    cfg: &CostConfig,
) -> Result<NormalizationConstants> {
    let g = &stack.geometry;
    let mut r_lo = f64::INFINITY;
    let mut r_hi = f64::NEG_INFINITY;
    let mut s_max = 0.0f64;
    let mut any_feasible = false;
    for row in 0..g.n_rows {
        for col in 0..g.n_cols {
            let cell = Cell::new(row, col);
            if stack.is_banned(cell) {
                continue;
            }
            any_feasible = true;
            let r = stack.rock_at(cell);
            r_lo = r_lo.min(r);
            r_hi = r_hi.max(r);
            // Forward directions only; slope magnitude is symmetric.
            for d in [DIRS[1], DIRS[2], DIRS[3], DIRS[4]] {
                if let Some(n) = g.neighbor(cell, d) {
                    if stack.is_banned(n) {
                        continue;
                    }
                    if let Ok(s) = edge_slope(stack, cell, n) {
                        s_max = s_max.max(s.abs());
                    }
                }
            }
        }
    }
    if !any_feasible {
        return Err(PlannerError::FullyBanned);
    }

    let cell = g.cell_size;
    let diag = std::f64::consts::SQRT_2 * cell;

    // Every edge is traversable in both directions, so the slope domain is
    // the symmetric interval.
    let (e_poly_min, e_poly_max) = quad_extrema(&cfg.energy, -s_max, s_max, r_lo, r_hi);
    let (c_poly_min, c_poly_max) = quad_extrema(&cfg.crash, -s_max, s_max, r_lo, r_hi);

    let e_star_max = (e_poly_max * diag / cfg.d_sim).max(ENERGY_FLOOR);
    let e_star_min = (e_poly_min * cell / cfg.d_sim).max(ENERGY_FLOOR);
    let crash_raw_min = c_poly_min.clamp(0.0, 1.0);
    let crash_raw_max = c_poly_max.clamp(0.0, 1.0);
    let r_star_max = scale_crash_rate(crash_raw_max, diag, cfg.d_sim);
    let r_star_min = scale_crash_rate(crash_raw_min, cell, cfg.d_sim);

    // Per-meter lower bounds. Energy is exactly linear in distance; the
    // crash scaling is concave in distance, so its per-meter rate is
    // minimal at the longest (diagonal) edge.
    let e_min_per_meter = (e_star_min / e_star_max) / cell;
    let r_min_per_meter = if r_star_max > 0.0 {
        scale_crash_rate(crash_raw_min, diag, cfg.d_sim) / r_star_max / diag
    } else {
        0.0
    };
    let h_min_per_meter = weights.alpha1 * e_min_per_meter + weights.alpha2 * r_min_per_meter;

    Ok(NormalizationConstants {
        e_star_max,
        e_star_min,
        r_star_max,
        r_star_min,
        crash_raw_min,
        crash_raw_max,
        h_min_per_meter,
        d_sim: cfg.d_sim,
        velocity: cfg.velocity,
        cell_size: cell,
        energy: cfg.energy,
        crash: cfg.crash,
    })
}
