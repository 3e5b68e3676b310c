use std::path::PathBuf;

use thiserror::Error;

use crate::raster::{Cell, LayerKind};

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },

    #[error("{kind} value {value} out of range at row {row}, col {col}")]
    Range {
        kind: LayerKind,
        value: f64,
        row: usize,
        col: usize,
    },

    #[error("layer geometry mismatch: {0}")]
    GeometryMismatch(String),

    #[error("duplicate layer kind {0}")]
    DuplicateLayer(LayerKind),

    #[error("missing elevation layer")]
    MissingElevation,

    #[error("cells ({},{}) and ({},{}) are not 8-neighbors", .0.row, .0.col, .1.row, .1.col)]
    NotAdjacent(Cell, Cell),

    #[error("no feasible cells on the map")]
    FullyBanned,

    #[error("endpoint ({},{}) is banned or out of bounds", .0.row, .0.col)]
    BadEndpoint(Cell),

    #[error("no feasible path from ({},{}) to ({},{})", .0.row, .0.col, .1.row, .1.col)]
    NoPath(Cell, Cell),

    #[error("every weight combination failed to produce a path")]
    AllTriplesFailed,

    #[error("no record satisfies the energy bound for segment {0}")]
    ConstraintInfeasible(usize),

    #[error("invalid weights ({0}, {1}, {2}): each must lie in [0,1] and sum to 1")]
    InvalidWeights(f64, f64, f64),

    #[error("map id mismatch: {0} vs {1}")]
    MapIdMismatch(String, String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, PlannerError>;
