//! Map-overlay rendering: grayscale elevation backdrop, hatched banned
//! cells, per-cluster path colors. Binary PPM for golden-image tests and
//! SVG for human inspection, both deterministic.

use std::io::Write;
use std::path::Path;

use crate::error::{PlannerError, Result};
use crate::raster::{Cell, MapStack};

/// Fixed palette; paths are colored by `palette_index % len`.
pub const PALETTE: [[u8; 3]; 8] = [
    [230, 57, 70],   // red
    [29, 131, 172],  // blue
    [42, 157, 143],  // teal
    [233, 196, 106], // yellow
    [155, 93, 229],  // violet
    [244, 140, 6],   // orange
    [87, 204, 153],  // green
    [239, 71, 161],  // pink
];

pub struct PathOverlay<'a> {
    pub cells: &'a [Cell],
    pub palette_index: usize,
    pub highlight: bool,
}

fn gray_levels(stack: &MapStack) -> Vec<u8> {
    let lo = stack.elevation_stats.min;
    let hi = stack.elevation_stats.max;
    let span = hi - lo;
    stack
        .elevation
        .iter()
        .map(|&v| {
            if v == stack.geometry.nodata || v.is_nan() {
                0
            } else if span > 0.0 {
                (40.0 + (v - lo) / span * 200.0) as u8
            } else {
                128
            }
        })
        .collect()
}

/// Render to a binary PPM, `scale` pixels per map cell.
pub fn render_ppm(stack: &MapStack, overlays: &[PathOverlay<'_>], scale: usize, path: &Path) -> Result<()> {
    let g = &stack.geometry;
    for overlay in overlays {
        if let Some(bad) = overlay.cells.iter().find(|c| !g.contains(**c)) {
            return Err(PlannerError::Config(format!(
                "path cell ({},{}) outside the {}x{} map",
                bad.row, bad.col, g.n_rows, g.n_cols
            )));
        }
    }
    let scale = scale.max(1);
    let gray = gray_levels(stack);
    let width = g.n_cols * scale;
    let height = g.n_rows * scale;
    let mut pixels = vec![0u8; width * height * 3];
    for row in 0..g.n_rows {
        for col in 0..g.n_cols {
            let idx = row * g.n_cols + col;
            let v = gray[idx];
            let color = if stack.banned[idx] {
                // Diagonal hatch over a darkened backdrop.
                None
            } else {
                Some([v, v, v])
            };
            for pr in 0..scale {
                for pc in 0..scale {
                    let px = (row * scale + pr) * width + col * scale + pc;
                    let rgb = color.unwrap_or_else(|| {
                        if (row * scale + pr + col * scale + pc) % 4 < 2 {
                            [v / 2, v / 4, v / 4]
                        } else {
                            [v / 2, v / 2, v / 2]
                        }
                    });
                    pixels[px * 3..px * 3 + 3].copy_from_slice(&rgb);
                }
            }
        }
    }
    // Paths on top; highlighted paths paint a thicker footprint.
    for overlay in overlays {
        let rgb = PALETTE[overlay.palette_index % PALETTE.len()];
        for &cell in overlay.cells {
            paint_cell(&mut pixels, width, height, cell, scale, rgb, overlay.highlight);
        }
    }

    let mut out = Vec::with_capacity(pixels.len() + 32);
    write!(out, "P6\n{width} {height}\n255\n").expect("in-memory write");
    out.extend_from_slice(&pixels);
    std::fs::write(path, out).map_err(|source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn paint_cell(
    pixels: &mut [u8],
    width: usize,
    height: usize,
    cell: Cell,
    scale: usize,
    rgb: [u8; 3],
    highlight: bool,
) {
    let pad = if highlight { scale } else { 0 };
    let r0 = (cell.row * scale).saturating_sub(pad / 2);
    let c0 = (cell.col * scale).saturating_sub(pad / 2);
    for pr in 0..scale + pad {
        for pc in 0..scale + pad {
            let row = r0 + pr;
            let col = c0 + pc;
            if row < height && col < width {
                let px = row * width + col;
                pixels[px * 3..px * 3 + 3].copy_from_slice(&rgb);
            }
        }
    }
}

/// SVG companion with the same palette; banned cells drawn as hatched
/// rectangles, paths as polylines.
pub fn render_svg(stack: &MapStack, overlays: &[PathOverlay<'_>], path: &Path) -> Result<()> {
    let g = &stack.geometry;
    let gray = gray_levels(stack);
    let w = g.n_cols;
    let h = g.n_rows;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {w} {h}\" width=\"{}\" height=\"{}\">\n",
        w * 4,
        h * 4
    ));
    svg.push_str(
        "<defs><pattern id=\"hatch\" width=\"2\" height=\"2\" patternUnits=\"userSpaceOnUse\" \
         patternTransform=\"rotate(45)\"><rect width=\"2\" height=\"2\" fill=\"#552222\"/>\
         <line x1=\"0\" y1=\"0\" x2=\"0\" y2=\"2\" stroke=\"#aa4444\" stroke-width=\"0.7\"/>\
         </pattern></defs>\n",
    );
    for row in 0..h {
        for col in 0..w {
            let v = gray[row * w + col];
            let fill = if stack.banned[row * w + col] {
                "url(#hatch)".to_string()
            } else {
                format!("#{v:02x}{v:02x}{v:02x}")
            };
            svg.push_str(&format!(
                "<rect x=\"{col}\" y=\"{row}\" width=\"1\" height=\"1\" fill=\"{fill}\"/>\n"
            ));
        }
    }
    for overlay in overlays {
        let [r, g_, b] = PALETTE[overlay.palette_index % PALETTE.len()];
        let pts: Vec<String> = overlay
            .cells
            .iter()
            .map(|c| format!("{},{}", c.col as f64 + 0.5, c.row as f64 + 0.5))
            .collect();
        let width = if overlay.highlight { 0.8 } else { 0.35 };
        svg.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"#{r:02x}{g_:02x}{b:02x}\" stroke-width=\"{width}\"/>\n",
            pts.join(" ")
        ));
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|source| PlannerError::Io {
        path: path.to_path_buf(),
        source,
    })
}
