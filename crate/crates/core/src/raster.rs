//! Aligned multi-layer raster maps: the planning world.
//!
//! Layers are stored row-major with row 0 being the northernmost row,
//! matching the on-disk ASCII grid format.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{PlannerError, Result};

/// Grid cell address, row 0 = northernmost row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub row: usize,
    pub col: usize,
}

impl Cell {
    pub fn new(row: usize, col: usize) -> Self {
        Cell { row, col }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.row, self.col)
    }
}

/// The eight grid directions in the fixed expansion order used everywhere
/// (planner neighbor loop, path run-length encoding).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dir {
    N,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

pub const DIRS: [Dir; 8] = [
    Dir::N,
    Dir::NE,
    Dir::E,
    Dir::SE,
    Dir::S,
    Dir::SW,
    Dir::W,
    Dir::NW,
];

impl Dir {
    /// (row delta, col delta); north decreases the row index.
    pub fn delta(self) -> (isize, isize) {
        match self {
            Dir::N => (-1, 0),
            Dir::NE => (-1, 1),
            Dir::E => (0, 1),
            Dir::SE => (1, 1),
            Dir::S => (1, 0),
            Dir::SW => (1, -1),
            Dir::W => (0, -1),
            Dir::NW => (-1, -1),
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, Dir::NE | Dir::SE | Dir::SW | Dir::NW)
    }

    pub fn letter(self) -> &'static str {
        match self {
            Dir::N => "N",
            Dir::NE => "NE",
            Dir::E => "E",
            Dir::SE => "SE",
            Dir::S => "S",
            Dir::SW => "SW",
            Dir::W => "W",
            Dir::NW => "NW",
        }
    }

    pub fn from_letter(s: &str) -> Option<Dir> {
        DIRS.iter().copied().find(|d| d.letter() == s)
    }

    /// Direction of the step `from -> to`, if they are 8-neighbors.
    pub fn between(from: Cell, to: Cell) -> Option<Dir> {
        let dr = to.row as isize - from.row as isize;
        let dc = to.col as isize - from.col as isize;
        DIRS.iter().copied().find(|d| d.delta() == (dr, dc))
    }
}

/// Which map layer a grid of values represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerKind {
    Elevation,
    RockAbundance,
    ScientificInterest,
    Banned,
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LayerKind::Elevation => "elevation",
            LayerKind::RockAbundance => "rock_abundance",
            LayerKind::ScientificInterest => "scientific_interest",
            LayerKind::Banned => "banned",
        };
        f.write_str(s)
    }
}

impl LayerKind {
    pub fn parse(s: &str) -> Option<LayerKind> {
        match s {
            "elevation" | "dem" => Some(LayerKind::Elevation),
            "rock_abundance" | "rock" => Some(LayerKind::RockAbundance),
            "scientific_interest" | "science" => Some(LayerKind::ScientificInterest),
            "banned" => Some(LayerKind::Banned),
            _ => None,
        }
    }
}

/// Shared geometry of all layers in a stack.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub n_rows: usize,
    pub n_cols: usize,
    /// Meters per pixel.
    pub cell_size: f64,
    /// World coordinates of the lower-left cell corner.
    pub origin: (f64, f64),
    /// Sentinel marking missing cells.
    pub nodata: f64,
}

impl GridGeometry {
    pub fn validate(&self) -> Result<()> {
        if self.n_rows < 2 || self.n_cols < 2 {
            return Err(PlannerError::GeometryMismatch(format!(
                "grid must be at least 2x2, got {}x{}",
                self.n_rows, self.n_cols
            )));
        }
        if !(self.cell_size > 0.0) {
            return Err(PlannerError::GeometryMismatch(format!(
                "cell size must be positive, got {}",
                self.cell_size
            )));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.n_rows * self.n_cols
    }

    pub fn index(&self, c: Cell) -> usize {
        c.row * self.n_cols + c.col
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.row < self.n_rows && c.col < self.n_cols
    }

    pub fn neighbor(&self, c: Cell, d: Dir) -> Option<Cell> {
        let (dr, dc) = d.delta();
        let row = c.row.checked_add_signed(dr)?;
        let col = c.col.checked_add_signed(dc)?;
        let n = Cell::new(row, col);
        self.contains(n).then_some(n)
    }

    /// Planar distance between the centers of two 8-neighbor cells, in meters.
    pub fn step_distance(&self, from: Cell, to: Cell) -> Result<f64> {
        let d = Dir::between(from, to).ok_or(PlannerError::NotAdjacent(from, to))?;
        Ok(if d.is_diagonal() {
            std::f64::consts::SQRT_2 * self.cell_size
        } else {
            self.cell_size
        })
    }

    /// Straight-line distance between cell centers, in meters.
    pub fn euclid_distance(&self, a: Cell, b: Cell) -> f64 {
        let dr = a.row as f64 - b.row as f64;
        let dc = a.col as f64 - b.col as f64;
        self.cell_size * (dr * dr + dc * dc).sqrt()
    }

    fn matches(&self, other: &GridGeometry) -> bool {
        self.n_rows == other.n_rows
            && self.n_cols == other.n_cols
            && self.cell_size == other.cell_size
            && self.origin == other.origin
    }
}

/// One raster layer as loaded from disk.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapLayer {
    pub kind: LayerKind,
    pub geometry: GridGeometry,
    /// Row-major values; nodata cells keep the sentinel.
    pub values: Vec<f64>,
}

/// Min/max over valid (non-nodata) cells.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct LayerStats {
    pub min: f64,
    pub max: f64,
}

fn layer_stats(values: &[f64], nodata: f64) -> LayerStats {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        if v == nodata || v.is_nan() {
            continue;
        }
        min = min.min(v);
        max = max.max(v);
    }
    LayerStats { min, max }
}

/// Immutable bundle of aligned layers; safe to share across planner runs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapStack {
    pub geometry: GridGeometry,
    pub elevation: Vec<f64>,
    pub rock: Vec<f64>,
    pub science: Vec<f64>,
    /// Derived banned mask: user markup OR slope/rock thresholds OR nodata elevation.
    pub banned: Vec<bool>,
    pub elevation_stats: LayerStats,
    pub rock_stats: LayerStats,
    pub science_stats: LayerStats,
}

/// Slope / rock limits used when deriving the banned mask.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BanLimits {
    pub max_slope_deg: f64,
    pub max_rock: f64,
}

impl Default for BanLimits {
    fn default() -> Self {
        BanLimits {
            max_slope_deg: 30.0,
            max_rock: 0.3,
        }
    }
}

const ROCK_RANGE_TOL: f64 = 1e-6;

/// Parse one layer from the six-line-header ASCII grid format.
pub fn load_layer(path: &Path, kind: LayerKind) -> Result<MapLayer> {
    let text = fs::read_to_string(path).map_err(|source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_layer(&text, kind).map_err(|msg| PlannerError::Parse {
        path: path.to_path_buf(),
        msg,
    })
}

fn parse_layer(text: &str, kind: LayerKind) -> std::result::Result<MapLayer, String> {
    let mut lines = text.lines();
    let mut header = |key: &str| -> std::result::Result<f64, String> {
        let line = lines
            .next()
            .ok_or_else(|| format!("missing header line `{key}`"))?;
        let mut it = line.split_whitespace();
        let k = it.next().ok_or_else(|| format!("empty header line, expected `{key}`"))?;
        if !k.eq_ignore_ascii_case(key) {
            return Err(format!("expected header `{key}`, found `{k}`"));
        }
        let v = it
            .next()
            .ok_or_else(|| format!("header `{key}` has no value"))?;
        v.parse::<f64>()
            .map_err(|e| format!("header `{key}`: {e}"))
    };

    let n_cols = header("ncols")? as usize;
    let n_rows = header("nrows")? as usize;
    let xll = header("xllcorner")?;
    let yll = header("yllcorner")?;
    let cell_size = header("cellsize")?;
    let nodata = header("nodata_value")?;

    let geometry = GridGeometry {
        n_rows,
        n_cols,
        cell_size,
        origin: (xll, yll),
        nodata,
    };
    geometry.validate().map_err(|e| e.to_string())?;

    let mut values = Vec::with_capacity(n_rows * n_cols);
    for row in 0..n_rows {
        let line = lines
            .next()
            .ok_or_else(|| format!("expected {n_rows} data rows, file ends at row {row}"))?;
        let mut count = 0usize;
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|e| format!("row {row}: bad value `{tok}`: {e}"))?;
            values.push(v);
            count += 1;
        }
        if count != n_cols {
            return Err(format!("row {row}: expected {n_cols} columns, found {count}"));
        }
    }
    if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
        return Err(format!("unexpected trailing data: `{extra}`"));
    }

    let mut layer = MapLayer {
        kind,
        geometry,
        values,
    };
    validate_layer(&mut layer).map_err(|e| e.to_string())?;
    Ok(layer)
}

fn validate_layer(layer: &mut MapLayer) -> Result<()> {
    let nodata = layer.geometry.nodata;
    let n_cols = layer.geometry.n_cols;
    match layer.kind {
        LayerKind::Elevation => {}
        LayerKind::RockAbundance => {
            for (i, v) in layer.values.iter_mut().enumerate() {
                if *v == nodata {
                    continue;
                }
                if *v < -ROCK_RANGE_TOL || *v > 1.0 + ROCK_RANGE_TOL {
                    return Err(PlannerError::Range {
                        kind: LayerKind::RockAbundance,
                        value: *v,
                        row: i / n_cols,
                        col: i % n_cols,
                    });
                }
                *v = v.clamp(0.0, 1.0);
            }
        }
        LayerKind::ScientificInterest => {
            let stats = layer_stats(&layer.values, nodata);
            if stats.min < 0.0 || stats.max > 1.0 {
                // Raw interest maps are rescaled; the planner expects [0,1].
                log::warn!(
                    "scientific interest outside [0,1] (min {}, max {}); min-max normalizing",
                    stats.min,
                    stats.max
                );
                let span = stats.max - stats.min;
                for v in layer.values.iter_mut() {
                    if *v == nodata {
                        continue;
                    }
                    *v = if span > 0.0 { (*v - stats.min) / span } else { 0.0 };
                }
            }
        }
        LayerKind::Banned => {
            for (i, v) in layer.values.iter_mut().enumerate() {
                if *v == nodata {
                    *v = 0.0;
                    continue;
                }
                if *v != 0.0 && *v != 1.0 {
                    return Err(PlannerError::Range {
                        kind: LayerKind::Banned,
                        value: *v,
                        row: i / n_cols,
                        col: i % n_cols,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Write a layer back out in the same ASCII grid format.
pub fn write_layer(layer: &MapLayer, path: &Path) -> Result<()> {
    let g = &layer.geometry;
    let mut out = String::new();
    out.push_str(&format!("ncols {}\n", g.n_cols));
    out.push_str(&format!("nrows {}\n", g.n_rows));
    out.push_str(&format!("xllcorner {}\n", g.origin.0));
    out.push_str(&format!("yllcorner {}\n", g.origin.1));
    out.push_str(&format!("cellsize {}\n", g.cell_size));
    out.push_str(&format!("nodata_value {}\n", g.nodata));
    for row in 0..g.n_rows {
        let start = row * g.n_cols;
        let cells: Vec<String> = layer.values[start..start + g.n_cols]
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    fs::write(path, out).map_err(|source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Combine loaded layers into a validated stack, filling defaults and
/// deriving the banned mask.
pub fn assemble_stack(layers: Vec<MapLayer>, limits: &BanLimits) -> Result<MapStack> {
    let mut elevation = None;
    let mut rock = None;
    let mut science = None;
    let mut banned = None;
    for layer in layers {
        let slot = match layer.kind {
            LayerKind::Elevation => &mut elevation,
            LayerKind::RockAbundance => &mut rock,
            LayerKind::ScientificInterest => &mut science,
            LayerKind::Banned => &mut banned,
        };
        if slot.is_some() {
            return Err(PlannerError::DuplicateLayer(layer.kind));
        }
        *slot = Some(layer);
    }
    let elevation = elevation.ok_or(PlannerError::MissingElevation)?;
    let geometry = elevation.geometry;
    geometry.validate()?;
    for layer in [&rock, &science, &banned].into_iter().flatten() {
        if !layer.geometry.matches(&geometry) {
            return Err(PlannerError::GeometryMismatch(format!(
                "{} layer is {}x{} at {} m/px, elevation is {}x{} at {} m/px",
                layer.kind,
                layer.geometry.n_rows,
                layer.geometry.n_cols,
                layer.geometry.cell_size,
                geometry.n_rows,
                geometry.n_cols,
                geometry.cell_size
            )));
        }
    }

    let zeros = || vec![0.0; geometry.n_cells()];
    let rock_values = rock.map(|l| l.values).unwrap_or_else(zeros);
    let science_values = science.map(|l| l.values).unwrap_or_else(zeros);
    let base_banned: Vec<bool> = banned
        .map(|l| l.values.iter().map(|&v| v == 1.0).collect())
        .unwrap_or_else(|| vec![false; geometry.n_cells()]);

    let nodata = geometry.nodata;
    let mut stack = MapStack {
        elevation_stats: layer_stats(&elevation.values, nodata),
        rock_stats: layer_stats(&rock_values, nodata),
        science_stats: layer_stats(&science_values, nodata),
        geometry,
        elevation: elevation.values,
        rock: rock_values,
        science: science_values,
        banned: base_banned,
    };
    stack.banned = derive_banned_mask(&stack, limits.max_slope_deg, limits.max_rock);
    Ok(stack)
}

/// Banned = user markup OR rock above threshold OR steepest incident edge
/// slope above threshold OR unknown (nodata) elevation.
pub fn derive_banned_mask(stack: &MapStack, max_slope_deg: f64, max_rock: f64) -> Vec<bool> {
    let g = &stack.geometry;
    let mut banned = stack.banned.clone();
    for row in 0..g.n_rows {
        for col in 0..g.n_cols {
            let cell = Cell::new(row, col);
            let idx = g.index(cell);
            if banned[idx] {
                continue;
            }
            let h = stack.elevation[idx];
            if h == g.nodata || h.is_nan() {
                banned[idx] = true;
                continue;
            }
            if stack.rock[idx] > max_rock {
                banned[idx] = true;
                continue;
            }
            let steepest = DIRS
                .iter()
                .filter_map(|&d| g.neighbor(cell, d))
                .filter_map(|n| edge_slope(stack, cell, n).ok())
                .fold(0.0f64, |acc, s| acc.max(s.abs()));
            if steepest > max_slope_deg {
                banned[idx] = true;
            }
        }
    }
    banned
}

/// Signed inclination of the straight line between cell centers, in degrees.
/// Positive uphill. Errors on non-adjacent cells or nodata elevation.
pub fn edge_slope(stack: &MapStack, from: Cell, to: Cell) -> Result<f64> {
    let g = &stack.geometry;
    let dist = g.step_distance(from, to)?;
    let h_from = stack.elevation[g.index(from)];
    let h_to = stack.elevation[g.index(to)];
    if h_from == g.nodata || h_to == g.nodata || h_from.is_nan() || h_to.is_nan() {
        return Err(PlannerError::Internal(format!(
            "edge_slope over nodata elevation at ({from}) -> ({to})"
        )));
    }
    Ok((h_to - h_from).atan2(dist).to_degrees())
}

impl MapStack {
    pub fn is_banned(&self, c: Cell) -> bool {
        self.banned[self.geometry.index(c)]
    }

    pub fn rock_at(&self, c: Cell) -> f64 {
        self.rock[self.geometry.index(c)]
    }

    pub fn interest_at(&self, c: Cell) -> f64 {
        self.science[self.geometry.index(c)]
    }

    pub fn elevation_at(&self, c: Cell) -> f64 {
        self.elevation[self.geometry.index(c)]
    }
}
