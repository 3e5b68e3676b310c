//! `render` subcommand: elevation backdrop with banned hatching, database
//! paths colored per cluster, representatives highlighted.

use std::path::Path;

use serde::Deserialize;

use traverse_core::cluster::ClusterReport;
use traverse_core::raster::Cell;
use traverse_core::render::{render_ppm, render_svg, PathOverlay};
use traverse_core::sweep::decode_path_rle;
use traverse_core::{PlannerError, Result};

use crate::{ensure_out, load_cost_config, load_db, load_stack, RenderArgs};

fn load_cluster_report(path: &Path) -> Result<ClusterReport> {
    // `cluster` writes a wrapper object; only the report matters here.
    #[derive(Deserialize)]
    struct Wrapper {
        report: ClusterReport,
    }
    let text = std::fs::read_to_string(path).map_err(|source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let w: Wrapper = serde_json::from_str(&text).map_err(|e| PlannerError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    Ok(w.report)
}

pub fn cmd_render(args: &RenderArgs) -> Result<()> {
    let cfg = load_cost_config(&args.maps.cost_config)?;
    let stack = load_stack(&args.maps, &cfg)?;

    // Decoded paths with (cluster color, highlight) annotations.
    let mut paths: Vec<(Vec<Cell>, usize, bool)> = Vec::new();
    if let Some(db_path) = &args.db {
        let db = load_db(db_path)?;
        let clusters = match &args.clusters {
            Some(p) => Some(load_cluster_report(p)?),
            None => None,
        };
        for record in db.records.iter().filter(|r| r.is_ok()) {
            let cells = decode_path_rle(&record.path_rle)?;
            let (color, highlight) = match &clusters {
                Some(report) => {
                    let point = report
                        .record_indices
                        .iter()
                        .position(|&idx| idx == record.idx);
                    match point {
                        Some(p) => (
                            report.assignments[p],
                            report.representatives.contains(&record.idx),
                        ),
                        // Record unknown to the clustering (e.g. clustered
                        // on a filtered database): skip it.
                        None => continue,
                    }
                }
                None => (0, false),
            };
            paths.push((cells, color, highlight));
        }
        // Draw highlighted representatives last so they stay on top.
        paths.sort_by_key(|(_, _, highlight)| *highlight);
    }

    let overlays: Vec<PathOverlay<'_>> = paths
        .iter()
        .map(|(cells, color, highlight)| PathOverlay {
            cells,
            palette_index: *color,
            highlight: *highlight,
        })
        .collect();

    ensure_out(&args.common.out)?;
    let ppm = args.common.out.join("map.ppm");
    let svg = args.common.out.join("map.svg");
    render_ppm(&stack, &overlays, args.scale, &ppm)?;
    render_svg(&stack, &overlays, &svg)?;
    println!("wrote {} and {}", ppm.display(), svg.display());
    Ok(())
}
