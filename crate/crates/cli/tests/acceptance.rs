//! End-to-end acceptance suite. Each test prints one PASS/FAIL line for
//! its criterion; oracles are implemented independently in this file
//! rather than borrowed from the library under test.

use std::collections::BinaryHeap;
use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use traverse_core::bench::{run_bench, BenchConfig};
use traverse_core::cluster::{default_candidates, kmeans_pp};
use traverse_core::cost::{
    compute_norms, crash_rate_raw, crash_rate_scaled, edge_cost, energy_raw, quad_extrema,
    scale_crash_rate, CostConfig, CostWeights, PolynomialCoeffs, CRASH_COEFFS, ENERGY_COEFFS,
};
use traverse_core::evaluator::{evaluate, invert_crash_scaling, NodeTime};
use traverse_core::mission::select_constrained;
use traverse_core::planner::{build_path, heuristic, plan, HeuristicMode, PlanRequest};
use traverse_core::raster::{
    assemble_stack, edge_slope, Cell, GridGeometry, LayerKind, MapLayer, MapStack, DIRS,
};
use traverse_core::sweep::{
    build_weight_grid, run_sweep, PathDatabase, RecordStatus, SweepRecord, DEFAULT_EPSILON,
};
use traverse_core::synth::{synth_layers, SynthParams};
use traverse_core::PlannerError;

/// Prints the criterion verdict even when the test panics mid-way.
struct Verdict(&'static str);

impl Drop for Verdict {
    fn drop(&mut self) {
        if std::thread::panicking() {
            println!("FAIL  criterion {}", self.0);
        } else {
            println!("PASS  criterion {}", self.0);
        }
    }
}

fn corpus_stack(seed: u64) -> MapStack {
    let params = SynthParams {
        n_rows: 32,
        n_cols: 32,
        seed,
        roughness: 0.4,
        rock_density: 0.3,
        hotspots: 3,
        ..SynthParams::default()
    };
    assemble_stack(
        synth_layers(&params).to_vec(),
        &CostConfig::default().ban_limits(),
    )
    .unwrap()
}

fn pick_unbanned(stack: &MapStack, rng: &mut ChaCha8Rng) -> Cell {
    loop {
        let cell = Cell::new(
            rng.gen_range(0..stack.geometry.n_rows),
            rng.gen_range(0..stack.geometry.n_cols),
        );
        if !stack.is_banned(cell) {
            return cell;
        }
    }
}

fn corpus_triples() -> [CostWeights; 5] {
    [
        CostWeights::ENERGY_ONLY,
        CostWeights::RISK_ONLY,
        CostWeights::SCIENCE_ONLY,
        CostWeights::new(1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0).unwrap(),
        CostWeights::new(0.2, 0.3, 0.5).unwrap(),
    ]
}

#[test]
fn criterion_01_astar_matches_dijkstra_oracle() {
    let _v = Verdict("1: A* total cost equals Dijkstra, never more expansions");
    let mut instances = 0usize;
    for seed in 0..50u64 {
        let stack = corpus_stack(seed);
        let cfg = CostConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let pairs: Vec<(Cell, Cell)> = (0..5)
            .map(|_| (pick_unbanned(&stack, &mut rng), pick_unbanned(&stack, &mut rng)))
            .collect();
        for weights in corpus_triples() {
            let norms = compute_norms(&stack, &weights, &cfg).unwrap();
            for &(start, goal) in &pairs {
                let mk = |mode| PlanRequest { start, goal, weights, heuristic_mode: mode };
                let astar = plan(&stack, &mk(HeuristicMode::Admissible), &norms);
                let dijkstra = plan(&stack, &mk(HeuristicMode::Zero), &norms);
                match (astar, dijkstra) {
                    (Ok(a), Ok(d)) => {
                        let denom = d.path.total_cost.abs().max(1e-30);
                        let rel = (a.path.total_cost - d.path.total_cost).abs() / denom;
                        assert!(
                            rel <= 1e-9,
                            "seed {seed} {start:?}->{goal:?}: {} vs {}",
                            a.path.total_cost,
                            d.path.total_cost
                        );
                        assert!(
                            a.stats.expanded <= d.stats.expanded,
                            "seed {seed}: A* expanded {} > Dijkstra {}",
                            a.stats.expanded,
                            d.stats.expanded
                        );
                        instances += 1;
                    }
                    (Err(_), Err(_)) => instances += 1,
                    (a, d) => panic!(
                        "seed {seed}: feasibility disagreement: astar ok={} dijkstra ok={}",
                        a.is_ok(),
                        d.is_ok()
                    ),
                }
            }
        }
    }
    assert!(instances >= 50 * 5 * 5);
}

/// Independent reverse Dijkstra: exact remaining cost-to-goal per cell.
fn true_remaining_costs(
    stack: &MapStack,
    weights: &CostWeights,
    norms: &traverse_core::cost::NormalizationConstants,
    goal: Cell,
) -> Vec<f64> {
    struct Entry(f64, usize);
    impl PartialEq for Entry {
        fn eq(&self, o: &Self) -> bool {
            self.0 == o.0 && self.1 == o.1
        }
    }
    impl Eq for Entry {}
    impl PartialOrd for Entry {
        fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
            Some(self.cmp(o))
        }
    }
    impl Ord for Entry {
        fn cmp(&self, o: &Self) -> std::cmp::Ordering {
            // Min-heap on cost.
            o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
        }
    }

    let g = &stack.geometry;
    let n = g.n_cells();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[g.index(goal)] = 0.0;
    heap.push(Entry(0.0, g.index(goal)));
    while let Some(Entry(d_u, u)) = heap.pop() {
        if done[u] {
            continue;
        }
        done[u] = true;
        let u_cell = Cell::new(u / g.n_cols, u % g.n_cols);
        for dir in DIRS {
            // Relax the forward edge v -> u_cell.
            let Some(v_cell) = g.neighbor(u_cell, dir) else { continue };
            if stack.is_banned(v_cell) {
                continue;
            }
            let c = edge_cost(stack, v_cell, u_cell, weights, norms)
                .unwrap()
                .weighted_total;
            if !c.is_finite() {
                continue;
            }
            let v = g.index(v_cell);
            if d_u + c < dist[v] {
                dist[v] = d_u + c;
                heap.push(Entry(dist[v], v));
            }
        }
    }
    dist
}

#[test]
fn criterion_02_heuristic_is_admissible_and_consistent() {
    let _v = Verdict("2: heuristic dominated by true remaining cost; consistent per edge");
    let cfg = CostConfig::default();

    // Admissibility against the reverse-Dijkstra oracle on the full corpus.
    for seed in 0..50u64 {
        let stack = corpus_stack(seed);
        let g = stack.geometry;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 1000);
        let goals: Vec<Cell> = (0..5)
            .map(|_| {
                let _ = pick_unbanned(&stack, &mut rng); // corpus start, unused here
                pick_unbanned(&stack, &mut rng)
            })
            .collect();
        for weights in corpus_triples() {
            let norms = compute_norms(&stack, &weights, &cfg).unwrap();
            for &goal in &goals {
                let dist = true_remaining_costs(&stack, &weights, &norms, goal);
                for row in 0..g.n_rows {
                    for col in 0..g.n_cols {
                        let cell = Cell::new(row, col);
                        if stack.is_banned(cell) || !dist[g.index(cell)].is_finite() {
                            continue;
                        }
                        let h = heuristic(cell, goal, &norms, &stack);
                        assert!(
                            dist[g.index(cell)] - h >= -1e-9,
                            "seed {seed} {cell:?}: h {h} exceeds true cost {}",
                            dist[g.index(cell)]
                        );
                    }
                }
            }
        }
    }

    // Consistency h(a) <= c(a,b) + h(b), exhaustively on 3 maps.
    for seed in 0..3u64 {
        let stack = corpus_stack(seed);
        let g = stack.geometry;
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 5000);
        let goal = pick_unbanned(&stack, &mut rng);
        for weights in corpus_triples() {
            let norms = compute_norms(&stack, &weights, &cfg).unwrap();
            for row in 0..g.n_rows {
                for col in 0..g.n_cols {
                    let a = Cell::new(row, col);
                    if stack.is_banned(a) {
                        continue;
                    }
                    for dir in DIRS {
                        let Some(b) = g.neighbor(a, dir) else { continue };
                        if stack.is_banned(b) {
                            continue;
                        }
                        let c = edge_cost(&stack, a, b, &weights, &norms)
                            .unwrap()
                            .weighted_total;
                        let ha = heuristic(a, goal, &norms, &stack);
                        let hb = heuristic(b, goal, &norms, &stack);
                        assert!(
                            ha <= c + hb + 1e-12,
                            "seed {seed} {a:?}->{b:?}: {ha} > {c} + {hb}"
                        );
                    }
                }
            }
        }
    }
}

/// Two-stage scan oracle: stated resolution, then one coarse step refined.
fn scan_extrema(
    coeffs: &PolynomialCoeffs,
    s_lo: f64,
    s_hi: f64,
    r_lo: f64,
    r_hi: f64,
) -> (f64, f64) {
    let scan = |s0: f64, s1: f64, r0: f64, r1: f64, ds: f64, dr: f64| {
        let n_s = (((s1 - s0) / ds).ceil() as usize).max(1);
        let n_r = (((r1 - r0) / dr).ceil() as usize).max(1);
        let mut min = (f64::INFINITY, (s0, r0));
        let mut max = (f64::NEG_INFINITY, (s0, r0));
        for i in 0..=n_s {
            let s = s0 + (s1 - s0) * i as f64 / n_s as f64;
            for j in 0..=n_r {
                let r = r0 + (r1 - r0) * j as f64 / n_r as f64;
                let v = coeffs.eval(s, r);
                if v < min.0 {
                    min = (v, (s, r));
                }
                if v > max.0 {
                    max = (v, (s, r));
                }
            }
        }
        (min, max)
    };
    let (cmin, cmax) = scan(s_lo, s_hi, r_lo, r_hi, 0.1, 0.001);
    let refine = |(_, (s, r)): (f64, (f64, f64))| {
        scan(
            (s - 0.1).max(s_lo),
            (s + 0.1).min(s_hi),
            (r - 0.001).max(r_lo),
            (r + 0.001).min(r_hi),
            1e-4,
            1e-6,
        )
    };
    (refine(cmin).0 .0, refine(cmax).1 .0)
}

#[test]
fn criterion_03_cost_model_spot_values_and_extrema() {
    let _v = Verdict("3: cost-model spot values and closed-form normalizer extrema");
    assert_eq!(energy_raw(0.0, 0.0, 8.0, &ENERGY_COEFFS, 8.0), 803.0);
    assert!((energy_raw(10.0, 0.0, 8.0, &ENERGY_COEFFS, 8.0) - 981.9).abs() <= 1e-9);
    assert_eq!(crash_rate_raw(0.0, 0.0, &CRASH_COEFFS), 0.0);
    assert!((scale_crash_rate(0.5, 16.0, 8.0) - 0.75).abs() <= 1e-12);

    for seed in 100..105u64 {
        let stack = corpus_stack(seed);
        let g = stack.geometry;
        // Independent feasible-domain derivation.
        let mut s_max = 0.0f64;
        let mut r_lo = f64::INFINITY;
        let mut r_hi = f64::NEG_INFINITY;
        for row in 0..g.n_rows {
            for col in 0..g.n_cols {
                let a = Cell::new(row, col);
                if stack.is_banned(a) {
                    continue;
                }
                r_lo = r_lo.min(stack.rock_at(a));
                r_hi = r_hi.max(stack.rock_at(a));
                for dir in DIRS {
                    if let Some(b) = g.neighbor(a, dir) {
                        if !stack.is_banned(b) {
                            s_max = s_max.max(edge_slope(&stack, a, b).unwrap().abs());
                        }
                    }
                }
            }
        }
        for coeffs in [&ENERGY_COEFFS, &CRASH_COEFFS] {
            let (cf_min, cf_max) = quad_extrema(coeffs, -s_max, s_max, r_lo, r_hi);
            let (bf_min, bf_max) = scan_extrema(coeffs, -s_max, s_max, r_lo, r_hi);
            let rel = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
            assert!(rel(cf_min, bf_min) <= 1e-6, "seed {seed}: min {cf_min} vs {bf_min}");
            assert!(rel(cf_max, bf_max) <= 1e-6, "seed {seed}: max {cf_max} vs {bf_max}");
        }
    }
}

/// Hand-built benign stack: gentle slopes, rock below the ban threshold.
fn long_path_stack(n: usize) -> MapStack {
    let geometry = GridGeometry {
        n_rows: n,
        n_cols: n,
        cell_size: 8.0,
        origin: (0.0, 0.0),
        nodata: -9999.0,
    };
    let idx = |row: usize, col: usize| row * n + col;
    let mut elevation = vec![0.0f64; n * n];
    let mut rock = vec![0.0f64; n * n];
    let mut science = vec![0.0f64; n * n];
    for row in 0..n {
        for col in 0..n {
            elevation[idx(row, col)] =
                2.0 * ((row as f64) * 0.37).sin() + 1.5 * ((col as f64) * 0.23).cos();
            rock[idx(row, col)] = 0.25 * (((row * 31 + col * 17) % 97) as f64 / 96.0);
            science[idx(row, col)] = ((row * 13 + col * 7) % 89) as f64 / 88.0;
        }
    }
    let layer = |kind, values| MapLayer { kind, geometry, values };
    assemble_stack(
        vec![
            layer(LayerKind::Elevation, elevation),
            layer(LayerKind::RockAbundance, rock),
            layer(LayerKind::ScientificInterest, science),
        ],
        &CostConfig::default().ban_limits(),
    )
    .unwrap()
}

fn serpentine(n: usize) -> Vec<Cell> {
    let mut cells = Vec::with_capacity(n * n);
    for row in 0..n {
        if row % 2 == 0 {
            cells.extend((0..n).map(|col| Cell::new(row, col)));
        } else {
            cells.extend((0..n).rev().map(|col| Cell::new(row, col)));
        }
    }
    cells
}

#[test]
fn criterion_04_evaluation_formulas() {
    let _v = Verdict("4: risk composition, crash-scaling inversion, science mean");
    let n = 101;
    let stack = long_path_stack(n);
    let cfg = CostConfig::default();
    let weights = CostWeights::new(0.2, 0.3, 0.5).unwrap();
    let norms = compute_norms(&stack, &weights, &cfg).unwrap();
    let cells = serpentine(n);
    assert!(cells.len() > 10_000);
    let path = build_path(&stack, &weights, &norms, cells.clone()).unwrap();
    let metrics = evaluate(&path, &stack, &norms, NodeTime::PerDistance);

    // Direct-product risk oracle from raw layer data.
    let mut survival = 1.0f64;
    for pair in cells.windows(2) {
        let d = stack.geometry.step_distance(pair[0], pair[1]).unwrap();
        let s = edge_slope(&stack, pair[0], pair[1]).unwrap();
        let p = crash_rate_scaled(s, stack.rock_at(pair[1]), d, &cfg.crash, cfg.d_sim);
        survival *= 1.0 - p;
    }
    let direct = 1.0 - survival;
    assert!(
        (metrics.risk_total - direct).abs() <= 1e-12,
        "{} vs {direct}",
        metrics.risk_total
    );

    // Per-edge crash scaling inverts back to the raw rate.
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..1000 {
        let s = rng.gen_range(-25.0..25.0);
        let r = rng.gen_range(0.0..0.2);
        let d = rng.gen_range(0.5..24.0);
        let raw = crash_rate_raw(s, r, &CRASH_COEFFS);
        let back = invert_crash_scaling(
            crash_rate_scaled(s, r, d, &CRASH_COEFFS, 8.0),
            d,
            8.0,
        );
        assert!((back - raw).abs() <= 1e-9, "s={s} r={r} d={d}: {back} vs {raw}");
    }

    // Science is the mean interest over visited nodes, start included.
    let mean: f64 =
        cells.iter().map(|&c| stack.interest_at(c)).sum::<f64>() / cells.len() as f64;
    assert!((metrics.science_total - mean).abs() <= 1e-12);
}

#[test]
fn criterion_05_weight_grid_and_corner_dominance() {
    let _v = Verdict("5: 10^3 weight grid plus corners; corner records dominate their objective");
    let grid = build_weight_grid(10, DEFAULT_EPSILON).unwrap();
    assert_eq!(grid.triples.len(), 1003);
    for t in &grid.triples {
        assert!((t.alpha1 + t.alpha2 + t.alpha3 - 1.0).abs() <= 1e-12);
    }
    let tail = &grid.triples[1000..];
    assert!(tail.contains(&CostWeights::ENERGY_ONLY));
    assert!(tail.contains(&CostWeights::RISK_ONLY));
    assert!(tail.contains(&CostWeights::SCIENCE_ONLY));

    let cfg = CostConfig::default();
    let small_grid = build_weight_grid(4, DEFAULT_EPSILON).unwrap();
    for seed in 0..10u64 {
        let params = SynthParams {
            n_rows: 16,
            n_cols: 16,
            seed: seed + 300,
            roughness: 0.4,
            rock_density: 0.3,
            hotspots: 2,
            ..SynthParams::default()
        };
        let stack = assemble_stack(synth_layers(&params).to_vec(), &cfg.ban_limits()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed + 900);
        let start = pick_unbanned(&stack, &mut rng);
        let goal = pick_unbanned(&stack, &mut rng);
        let db = match run_sweep(&stack, &cfg, start, goal, &small_grid, 2, NodeTime::PerDistance)
        {
            Ok(db) => db,
            // Disconnected endpoint draw: not a dominance counterexample.
            Err(PlannerError::AllTriplesFailed) => continue,
            Err(e) => panic!("sweep failed: {e}"),
        };
        let ok = |r: &&SweepRecord| r.is_ok();
        let corner = |w: CostWeights| {
            db.records
                .iter()
                .find(|r| r.is_ok() && r.weights == w)
                .expect("corner record present")
        };
        for (w, pick) in [
            (CostWeights::ENERGY_ONLY, 0usize),
            (CostWeights::RISK_ONLY, 1),
            (CostWeights::SCIENCE_ONLY, 2),
        ] {
            let get = |r: &SweepRecord| match pick {
                0 => r.cost_e,
                1 => r.cost_r,
                _ => r.cost_i,
            };
            let best = db.records.iter().filter(ok).map(|r| get(r)).fold(f64::INFINITY, f64::min);
            let c = get(corner(w));
            assert!(c <= best + 1e-9, "seed {seed}: corner {c} vs best {best}");
        }
    }
}

#[test]
fn criterion_06_clustering_recovers_blobs() {
    let _v = Verdict("6: k-means++ blob recovery, monotone SSE, worker invariance");
    let centers = [
        [0.1, 0.1, 0.1],
        [0.9, 0.1, 0.5],
        [0.1, 0.9, 0.9],
        [0.9, 0.9, 0.1],
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut points = Vec::with_capacity(1000);
    let mut labels = Vec::with_capacity(1000);
    for i in 0..1000 {
        let c = centers[i % 4];
        points.push([
            c[0] + rng.gen_range(-0.05..0.05),
            c[1] + rng.gen_range(-0.05..0.05),
            c[2] + rng.gen_range(-0.05..0.05),
        ]);
        labels.push(i % 4);
    }
    let report = kmeans_pp(&points, 4, 0, default_candidates(4)).unwrap();

    // Majority vote per cluster, then count agreements.
    let mut votes = [[0usize; 4]; 4];
    for (a, &l) in report.assignments.iter().zip(&labels) {
        votes[*a][l] += 1;
    }
    let majority: Vec<usize> = votes
        .iter()
        .map(|v| v.iter().enumerate().max_by_key(|(_, n)| **n).unwrap().0)
        .collect();
    let agree = report
        .assignments
        .iter()
        .zip(&labels)
        .filter(|(a, l)| majority[**a] == **l)
        .count();
    assert!(agree >= 990, "only {agree}/1000 recovered");

    for w in report.sse_history.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "SSE increased: {} -> {}", w[0], w[1]);
    }

    let run_in_pool = |threads: usize| {
        rayon_pool(threads)
            .install(|| kmeans_pp(&points, 4, 0, default_candidates(4)).unwrap())
    };
    let a = serde_json::to_string(&run_in_pool(1)).unwrap();
    let b = serde_json::to_string(&run_in_pool(8)).unwrap();
    assert_eq!(a, b);
}

fn rayon_pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_traverse")
}

fn run_ok(dir: &Path, envs: &[(&str, &str)], args: &[&str]) {
    let mut cmd = Command::new(exe());
    cmd.current_dir(dir).args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn traverse");
    assert!(
        out.status.success(),
        "traverse {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn golden_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .filter(|e| e.file_name() != "timings.json")
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn criterion_07_end_to_end_determinism() {
    let _v = Verdict("7: byte-identical goldens across reruns and worker counts");
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_ok(dir, &[], &[
        "synth", "--size", "64", "--seed", "3", "--rock-density", "0.3", "--out", "maps",
    ]);

    // Pick feasible endpoints the same way the planner would see them.
    let stack = assemble_stack(
        synth_layers(&SynthParams {
            seed: 3,
            rock_density: 0.3,
            ..SynthParams::default()
        })
        .to_vec(),
        &CostConfig::default().ban_limits(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let a = pick_unbanned(&stack, &mut rng);
    let b = pick_unbanned(&stack, &mut rng);
    let c = pick_unbanned(&stack, &mut rng);
    let cell = |x: Cell| format!("{},{}", x.row, x.col);

    std::fs::write(
        dir.join("mission.spec"),
        format!(
            "dem = maps/dem.asc\nrock = maps/rock.asc\nscience = maps/science.asc\n\
             waypoint = {}\nwaypoint = {}\nwaypoint = {}\nweights = 0.2,0.3,0.5\n",
            cell(a),
            cell(b),
            cell(c)
        ),
    )
    .unwrap();

    let scenarios: Vec<(&str, Vec<String>)> = vec![
        (
            "plan",
            vec![
                "plan".into(),
                "--map-dem".into(), "maps/dem.asc".into(),
                "--map-rock".into(), "maps/rock.asc".into(),
                "--map-science".into(), "maps/science.asc".into(),
                "--start".into(), cell(a),
                "--goal".into(), cell(b),
                "--weights".into(), "0.2,0.3,0.5".into(),
            ],
        ),
        (
            "sweep",
            vec![
                "sweep".into(),
                "--map-dem".into(), "maps/dem.asc".into(),
                "--map-rock".into(), "maps/rock.asc".into(),
                "--map-science".into(), "maps/science.asc".into(),
                "--start".into(), cell(a),
                "--goal".into(), cell(b),
                "--steps".into(), "4".into(),
            ],
        ),
        (
            "mission",
            vec!["mission".into(), "--spec".into(), "mission.spec".into()],
        ),
    ];

    let mut variant = 0usize;
    let mut run_variant = |name: &str, args: &[String], threads: &str| -> Vec<(String, Vec<u8>)> {
        variant += 1;
        let out = format!("out_{name}_{variant}");
        let mut full: Vec<&str> = args.iter().map(String::as_str).collect();
        full.push("--out");
        full.push(&out);
        run_ok(dir, &[("PLANNER_THREADS", threads)], &full);
        golden_files(&dir.join(out))
    };

    for (name, args) in &scenarios {
        let first = run_variant(name, args, "1");
        let again = run_variant(name, args, "1");
        let wide = run_variant(name, args, "8");
        assert_eq!(first, again, "{name}: rerun differs");
        assert_eq!(first, wide, "{name}: worker count changed output");
    }

    // Cluster golden needs the sweep database in a fixed location.
    run_ok(dir, &[("PLANNER_THREADS", "1")], &[
        "sweep",
        "--map-dem", "maps/dem.asc",
        "--map-rock", "maps/rock.asc",
        "--map-science", "maps/science.asc",
        "--start", &cell(a),
        "--goal", &cell(b),
        "--steps", "4",
        "--out", "db",
    ]);
    let cluster_args = vec![
        "cluster".to_string(),
        "--db".into(), "db/sweep.csv".into(),
        "--k".into(), "3".into(),
    ];
    let first = run_variant("cluster", &cluster_args, "1");
    let again = run_variant("cluster", &cluster_args, "1");
    let wide = run_variant("cluster", &cluster_args, "8");
    assert_eq!(first, again, "cluster: rerun differs");
    assert_eq!(first, wide, "cluster: worker count changed output");
}

#[test]
fn criterion_08_runtime_scales_linearly() {
    let _v = Verdict("8: plan runtime fits a line in pixel count, R^2 >= 0.9");
    let report = run_bench(
        &BenchConfig {
            sizes: vec![64, 128, 256, 512],
            trials: 5,
            weight_triples: 5,
            seed: 0,
        },
        &CostConfig::default(),
    )
    .unwrap();
    assert_eq!(report.rows.len(), 4);
    println!(
        "      fitted t = {:.6e} ms/pixel * n_pixel + {:.3} ms (R^2 = {:.4})",
        report.slope_a_ms_per_pixel, report.intercept_b_ms, report.r_squared
    );
    assert!(
        report.r_squared >= 0.9,
        "R^2 {} below 0.9",
        report.r_squared
    );
}

fn hand_record(idx: usize, energy: f64, risk: f64, science: f64) -> SweepRecord {
    SweepRecord {
        idx,
        weights: CostWeights::new(1.0 / 3.0, 1.0 / 3.0, 1.0 - 2.0 / 3.0).unwrap(),
        status: RecordStatus::Ok,
        cost_e: energy,
        cost_r: risk,
        cost_i: 1.0 - science,
        cost_total: energy + risk,
        length_m: 100.0,
        energy_rel: energy,
        risk_total: risk,
        science_total: science,
        path_rle: "0,0:E1".into(),
    }
}

#[test]
fn criterion_09_constraint_selection_matches_exhaustive_oracle() {
    let _v = Verdict("9: constrained selection equals exhaustive lexicographic scan");
    let mut records = vec![
        hand_record(0, 120.0, 0.30, 0.50),
        hand_record(1, 80.0, 0.20, 0.10),
        hand_record(2, 80.0, 0.20, 0.40), // ties risk with 1, more science
        hand_record(3, 95.0, 0.20, 0.40), // full tie with 2 except index
        hand_record(4, 60.0, 0.45, 0.90),
        hand_record(5, 150.0, 0.05, 0.60), // best risk, expensive
        hand_record(6, 99.0, 0.25, 0.70),
    ];
    records.push(SweepRecord::failure(7, CostWeights::RISK_ONLY)); // must be ignored
    let db = PathDatabase {
        map_id: "test".into(),
        start: Cell::new(0, 0),
        goal: Cell::new(0, 1),
        records,
    };

    // Independent oracle: filter, then full lexicographic sort.
    let oracle = |bound: f64| -> Option<usize> {
        let mut ok: Vec<&SweepRecord> = db
            .records
            .iter()
            .filter(|r| r.status == RecordStatus::Ok && r.energy_rel <= bound)
            .collect();
        ok.sort_by(|a, b| {
            a.risk_total
                .total_cmp(&b.risk_total)
                .then(b.science_total.total_cmp(&a.science_total))
                .then(a.idx.cmp(&b.idx))
        });
        ok.first().map(|r| r.idx)
    };

    for bound in [200.0, 120.0, 100.0, 80.0] {
        let expected = oracle(bound).expect("feasible bound");
        let chosen = select_constrained(&[&db], bound).unwrap();
        assert_eq!(chosen, vec![expected], "bound {bound}");
    }
    // Sanity-pin the interesting winners.
    assert_eq!(select_constrained(&[&db], 200.0).unwrap(), vec![5]);
    assert_eq!(select_constrained(&[&db], 100.0).unwrap(), vec![2]);

    match select_constrained(&[&db], 50.0) {
        Err(PlannerError::ConstraintInfeasible(0)) => {}
        other => panic!("expected constraint-infeasible, got {other:?}"),
    }
}

#[test]
fn criterion_10_corner_weights_print_exact_total() {
    let _v = Verdict("10: printed Total equals the active component at corner weights");
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    run_ok(dir, &[], &[
        "synth", "--size", "32", "--seed", "11", "--rock-density", "0.3", "--out", "maps",
    ]);
    let stack = assemble_stack(
        synth_layers(&SynthParams {
            n_rows: 32,
            n_cols: 32,
            seed: 11,
            rock_density: 0.3,
            ..SynthParams::default()
        })
        .to_vec(),
        &CostConfig::default().ban_limits(),
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = pick_unbanned(&stack, &mut rng);
    let goal = pick_unbanned(&stack, &mut rng);

    for (weights, active_row) in [
        ("1,0,0", "Energy cost"),
        ("0,1,0", "Risk cost"),
        ("0,0,1", "Scientific cost"),
    ] {
        let out = Command::new(exe())
            .current_dir(dir)
            .args([
                "plan",
                "--map-dem", "maps/dem.asc",
                "--map-rock", "maps/rock.asc",
                "--map-science", "maps/science.asc",
                "--start", &format!("{},{}", start.row, start.col),
                "--goal", &format!("{},{}", goal.row, goal.col),
                "--weights", weights,
                "--out", "plan_out",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let stdout = String::from_utf8(out.stdout).unwrap();
        let value = |row: &str| -> String {
            stdout
                .lines()
                .find(|l| l.starts_with(row))
                .unwrap_or_else(|| panic!("row `{row}` missing in:\n{stdout}"))
                .rsplit(' ')
                .next()
                .unwrap()
                .to_string()
        };
        assert_eq!(
            value(active_row),
            value("Total cost"),
            "weights {weights}: printed Total differs from {active_row}"
        );
    }
}
