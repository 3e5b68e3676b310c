//! Greedy k-means++ over the 3-D component-cost space of a path database,
//! with per-cluster variance and a center-nearest representative path.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PlannerError, Result};
use crate::sweep::PathDatabase;

pub type Point = [f64; 3];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterReport {
    pub k: usize,
    /// Per clustered point: cluster id.
    pub assignments: Vec<usize>,
    /// Original database record index of each clustered point.
    pub record_indices: Vec<usize>,
    /// Centroids in normalized cost space.
    pub centroids: Vec<Point>,
    /// Centroids mapped back to raw (sum E, sum R, sum I) coordinates.
    pub centroids_raw: Vec<Point>,
    /// Mean squared distance to the centroid, normalized space.
    pub variances: Vec<f64>,
    /// Per cluster: database record index nearest its centroid.
    pub representatives: Vec<usize>,
    pub member_counts: Vec<usize>,
    /// Total within-cluster SSE after each Lloyd iteration.
    pub sse_history: Vec<f64>,
}

fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

/// Per-axis min-max normalization of (sum E, sum R, sum I) of the
/// successful records; constant axes map to 0. Returns the points and the
/// record index behind each point, plus the axis ranges for mapping back.
pub fn normalize_cost_space(db: &PathDatabase) -> Result<(Vec<Point>, Vec<usize>, [(f64, f64); 3])> {
    let mut points = Vec::new();
    let mut indices = Vec::new();
    for r in &db.records {
        if r.is_ok() {
            points.push([r.cost_e, r.cost_r, r.cost_i]);
            indices.push(r.idx);
        }
    }
    if points.is_empty() {
        return Err(PlannerError::Config("no successful records to cluster".into()));
    }
    let mut ranges = [(f64::INFINITY, f64::NEG_INFINITY); 3];
    for p in &points {
        for axis in 0..3 {
            ranges[axis].0 = ranges[axis].0.min(p[axis]);
            ranges[axis].1 = ranges[axis].1.max(p[axis]);
        }
    }
    for p in points.iter_mut() {
        for axis in 0..3 {
            let (lo, hi) = ranges[axis];
            p[axis] = if hi > lo { (p[axis] - lo) / (hi - lo) } else { 0.0 };
        }
    }
    Ok((points, indices, ranges))
}

// Deterministic D^2-weighted draw: cumulative scan against one uniform
// sample. Points with zero weight (already-chosen centers) are skipped.
fn weighted_draw(weights: &[f64], u: f64) -> Option<usize> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return None;
    }
    let target = u * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if acc >= target && w > 0.0 {
            return Some(i);
        }
    }
    weights.iter().rposition(|&w| w > 0.0)
}

/// Default greedy candidate count, floor(2 + ln k).
pub fn default_candidates(k: usize) -> usize {
    (2.0 + (k as f64).ln()).floor() as usize
}

/// Greedy k-means++ seeding followed by Lloyd iterations to an assignment
/// fixpoint (at most 300 rounds). Deterministic for a fixed seed and any
/// worker count.
pub fn kmeans_pp(points: &[Point], k: usize, seed: u64, candidates: usize) -> Result<ClusterReport> {
    use rand::{Rng, SeedableRng};
    if k == 0 || points.is_empty() || k > points.len() {
        return Err(PlannerError::Config(format!(
            "need 1 <= k <= #points, got k = {k} with {} points",
            points.len()
        )));
    }
    let candidates = candidates.max(1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    // Seeding. First center uniform; each further center is the best of
    // `candidates` D^2-weighted samples by resulting total potential.
    let mut centers: Vec<Point> = Vec::with_capacity(k);
    let first = rng.gen_range(0..points.len());
    centers.push(points[first]);
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0])).collect();
    while centers.len() < k {
        let mut best: Option<(f64, usize)> = None;
        for _ in 0..candidates {
            let u: f64 = rng.gen();
            let Some(cand) = weighted_draw(&d2, u) else { break };
            let potential: f64 = d2
                .iter()
                .enumerate()
                .map(|(i, &cur)| cur.min(dist2(&points[i], &points[cand])))
                .sum();
            if best.map_or(true, |(bp, _)| potential < bp) {
                best = Some((potential, cand));
            }
        }
        let cand = match best {
            Some((_, c)) => c,
            // All remaining distances are zero: duplicate the first point
            // not yet chosen as a center.
            None => (0..points.len())
                .find(|&i| !centers.contains(&points[i]))
                .unwrap_or(0),
        };
        centers.push(points[cand]);
        for (i, cur) in d2.iter_mut().enumerate() {
            *cur = cur.min(dist2(&points[i], &points[cand]));
        }
    }

    // Lloyd iterations.
    let mut assignments = assign(points, &centers);
    let mut sse_history = vec![sse(points, &centers, &assignments)];
    for _ in 0..300 {
        recenter(points, &assignments, &mut centers, k);
        let next = assign(points, &centers);
        sse_history.push(sse(points, &centers, &next));
        let converged = next == assignments;
        assignments = next;
        if converged {
            break;
        }
    }

    let mut member_counts = vec![0usize; k];
    for &a in &assignments {
        member_counts[a] += 1;
    }
    let mut variances = vec![0.0f64; k];
    for (i, &a) in assignments.iter().enumerate() {
        variances[a] += dist2(&points[i], &centers[a]);
    }
    for c in 0..k {
        if member_counts[c] > 0 {
            variances[c] /= member_counts[c] as f64;
        }
    }
    // Center-nearest member, ties to the lowest point index.
    let mut representatives = vec![usize::MAX; k];
    let mut best_d = vec![f64::INFINITY; k];
    for (i, &a) in assignments.iter().enumerate() {
        let d = dist2(&points[i], &centers[a]);
        if d < best_d[a] {
            best_d[a] = d;
            representatives[a] = i;
        }
    }

    Ok(ClusterReport {
        k,
        assignments,
        record_indices: (0..points.len()).collect(),
        centroids: centers,
        centroids_raw: Vec::new(),
        variances,
        representatives,
        member_counts,
        sse_history,
    })
}

fn assign(points: &[Point], centers: &[Point]) -> Vec<usize> {
    points
        .par_iter()
        .map(|p| {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = dist2(p, center);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn recenter(points: &[Point], assignments: &[usize], centers: &mut Vec<Point>, k: usize) {
    let mut sums = vec![[0.0f64; 3]; k];
    let mut counts = vec![0usize; k];
    for (p, &a) in points.iter().zip(assignments) {
        for axis in 0..3 {
            sums[a][axis] += p[axis];
        }
        counts[a] += 1;
    }
    // An emptied cluster grabs the point farthest from its own centroid.
    for c in 0..k {
        if counts[c] > 0 {
            for axis in 0..3 {
                centers[c][axis] = sums[c][axis] / counts[c] as f64;
            }
        } else {
            let far = points
                .iter()
                .enumerate()
                .max_by(|(i, p), (j, q)| {
                    dist2(p, &centers[assignments[*i]])
                        .total_cmp(&dist2(q, &centers[assignments[*j]]))
                        .then(j.cmp(i))
                })
                .map(|(i, _)| i)
                .unwrap();
            centers[c] = points[far];
        }
    }
}

fn sse(points: &[Point], centers: &[Point], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(p, &a)| dist2(p, &centers[a]))
        .sum()
}

/// Cluster the successful records of a database.
pub fn cluster_db(db: &PathDatabase, k: usize, seed: u64, candidates: usize) -> Result<ClusterReport> {
    let (points, indices, ranges) = normalize_cost_space(db)?;
    let mut report = kmeans_pp(&points, k, seed, candidates)?;
    report.record_indices = indices.clone();
    report.representatives = report
        .representatives
        .iter()
        .map(|&point_idx| indices[point_idx])
        .collect();
    report.centroids_raw = report
        .centroids
        .iter()
        .map(|c| {
            let mut raw = *c;
            for axis in 0..3 {
                let (lo, hi) = ranges[axis];
                raw[axis] = lo + c[axis] * (hi - lo);
            }
            raw
        })
        .collect();
    Ok(report)
}

/// One summary row per cluster, with the representative's physical metrics.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterSummaryRow {
    pub cluster: usize,
    pub representative_idx: usize,
    /// Representative energy as percent of the database maximum.
    pub energy_pct: f64,
    pub risk_pct: f64,
    pub science_pct: f64,
    pub member_count: usize,
    pub variance: f64,
}

pub fn cluster_summary(report: &ClusterReport, db: &PathDatabase) -> Result<Vec<ClusterSummaryRow>> {
    let max_energy = db
        .records
        .iter()
        .filter(|r| r.is_ok())
        .map(|r| r.energy_rel)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max_energy > 0.0) {
        return Err(PlannerError::Config("database has no positive-energy record".into()));
    }
    let mut rows = Vec::with_capacity(report.k);
    for c in 0..report.k {
        let rep_idx = report.representatives[c];
        let rep = db
            .records
            .iter()
            .find(|r| r.idx == rep_idx)
            .ok_or_else(|| PlannerError::Internal(format!("representative {rep_idx} missing")))?;
        rows.push(ClusterSummaryRow {
            cluster: c,
            representative_idx: rep_idx,
            energy_pct: rep.energy_rel / max_energy * 100.0,
            risk_pct: rep.risk_total * 100.0,
            science_pct: rep.science_total * 100.0,
            member_count: report.member_counts[c],
            variance: report.variances[c],
        });
    }
    Ok(rows)
}
