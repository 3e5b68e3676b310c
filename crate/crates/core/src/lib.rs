//! Multi-objective global path planning on raster terrain layers.
//!
//! The pipeline: load or synthesize map layers ([`raster`], [`synth`]),
//! combine them into a weighted direction-dependent edge cost ([`cost`]),
//! search with A* ([`planner`]), back-transform to physical metrics
//! ([`evaluator`]), sweep the weight simplex into a path database
//! ([`sweep`]), cluster it ([`cluster`]), and assemble multi-waypoint
//! missions ([`mission`]).

pub mod bench;
pub mod cluster;
pub mod cost;
pub mod error;
pub mod evaluator;
pub mod mission;
pub mod planner;
pub mod raster;
pub mod render;
pub mod sweep;
pub mod synth;

pub use error::{PlannerError, Result};
