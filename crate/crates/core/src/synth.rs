//! Seeded synthetic map layers for desk-scale testing: fractal elevation,
//! patchy rock abundance, Gaussian interest hotspots.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::raster::{write_layer, GridGeometry, LayerKind, MapLayer};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_rows: usize,
    pub n_cols: usize,
    pub cell_size: f64,
    pub seed: u64,
    /// 0 gives a perfectly flat elevation layer.
    pub roughness: f64,
    /// 0 gives an all-zero rock layer; 1 saturates at the ban threshold.
    pub rock_density: f64,
    pub hotspots: usize,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            n_rows: 64,
            n_cols: 64,
            cell_size: 8.0,
            seed: 0,
            roughness: 0.5,
            rock_density: 0.5,
            hotspots: 3,
        }
    }
}

// Seeded lattice hash; stable across platforms (no float intermediate).
fn lattice(seed: u64, octave: u32, xi: i64, yi: i64) -> f64 {
    let mut h = seed
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(octave as u64)
        .wrapping_mul(0xbf58476d1ce4e5b9)
        .wrapping_add(xi as u64)
        .wrapping_mul(0x94d049bb133111eb)
        .wrapping_add(yi as u64);
    h ^= h >> 30;
    h = h.wrapping_mul(0xbf58476d1ce4e5b9);
    h ^= h >> 27;
    h = h.wrapping_mul(0x94d049bb133111eb);
    h ^= h >> 31;
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn value_noise(seed: u64, octave: u32, x: f64, y: f64) -> f64 {
    let xi = x.floor() as i64;
    let yi = y.floor() as i64;
    let tx = smoothstep(x - xi as f64);
    let ty = smoothstep(y - yi as f64);
    let v00 = lattice(seed, octave, xi, yi);
    let v10 = lattice(seed, octave, xi + 1, yi);
    let v01 = lattice(seed, octave, xi, yi + 1);
    let v11 = lattice(seed, octave, xi + 1, yi + 1);
    let a = v00 + (v10 - v00) * tx;
    let b = v01 + (v11 - v01) * tx;
    a + (b - a) * ty
}

fn fbm(seed: u64, x: f64, y: f64, octaves: u32) -> f64 {
    let mut total = 0.0;
    let mut freq = 1.0;
    let mut amp = 1.0;
    let mut norm = 0.0;
    for o in 0..octaves {
        total += value_noise(seed, o, x * freq, y * freq) * amp;
        norm += amp;
        freq *= 2.0;
        amp *= 0.5;
    }
    total / norm
}

/// Deterministic layer set for the given parameters.
pub fn synth_layers(params: &SynthParams) -> [MapLayer; 4] {
    let geometry = GridGeometry {
        n_rows: params.n_rows,
        n_cols: params.n_cols,
        cell_size: params.cell_size,
        origin: (0.0, 0.0),
        nodata: -9999.0,
    };
    let n = geometry.n_cells();
    let extent = params.n_rows.max(params.n_cols) as f64;
    // Feature wavelength ~ a quarter of the map; amplitude scales with
    // roughness so slopes, not absolute heights, stay comparable across
    // grid resolutions.
    let base_freq = 4.0 / extent;
    let amplitude = params.roughness * extent * params.cell_size * 0.05;

    let mut elevation = vec![0.0f64; n];
    let mut rock = vec![0.0f64; n];
    for row in 0..params.n_rows {
        for col in 0..params.n_cols {
            let idx = row * params.n_cols + col;
            let x = col as f64 * base_freq;
            let y = row as f64 * base_freq;
            if params.roughness > 0.0 {
                elevation[idx] = amplitude * fbm(params.seed, x, y, 4);
            }
            if params.rock_density > 0.0 {
                let v = 0.5 + 0.5 * fbm(params.seed.wrapping_add(1), x * 2.0, y * 2.0, 3);
                rock[idx] = (params.rock_density * v * v).clamp(0.0, 1.0);
            }
        }
    }

    let mut science = vec![0.0f64; n];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(2));
    for _ in 0..params.hotspots {
        let cr = rng.gen_range(0..params.n_rows) as f64;
        let cc = rng.gen_range(0..params.n_cols) as f64;
        let sigma = extent / 10.0;
        for row in 0..params.n_rows {
            for col in 0..params.n_cols {
                let d2 = (row as f64 - cr).powi(2) + (col as f64 - cc).powi(2);
                let idx = row * params.n_cols + col;
                science[idx] = (science[idx] + (-d2 / (2.0 * sigma * sigma)).exp()).min(1.0);
            }
        }
    }

    let layer = |kind, values| MapLayer { kind, geometry, values };
    [
        layer(LayerKind::Elevation, elevation),
        layer(LayerKind::RockAbundance, rock),
        layer(LayerKind::ScientificInterest, science),
        layer(LayerKind::Banned, vec![0.0; n]),
    ]
}

/// Write dem/rock/science/banned ASCII grids into `dir`.
pub fn write_synth_layers(params: &SynthParams, dir: &Path) -> Result<[std::path::PathBuf; 4]> {
    let layers = synth_layers(params);
    let names = ["dem.asc", "rock.asc", "science.asc", "banned.asc"];
    let mut paths = Vec::with_capacity(4);
    for (layer, name) in layers.iter().zip(names) {
        let path = dir.join(name);
        write_layer(layer, &path)?;
        paths.push(path);
    }
    Ok(paths.try_into().unwrap())
}
