//! File formats, parallel sweeps, SVG figures and the command-line front
//! end for [`heraldsim_core`].
//!
//! * [`thresholds`]: threshold-curve files.
//! * [`config`]: sweep configuration files and their resolution.
//! * [`tables`]: tile-map and contour CSV.
//! * [`cache`]: shared click-weight tables.
//! * [`parallel`]: rayon sweep, bitwise equal to the sequential one.
//! * [`svg`]: heatmaps and contour charts.
//! * [`manifest`]: run manifests.
//! * [`commands`], [`cli`]: the `heraldsim` subcommands.

pub mod cache;
pub mod cli;
pub mod commands;
pub mod config;
mod error;
pub mod manifest;
pub mod parallel;
pub mod svg;
pub mod tables;
pub mod thresholds;

pub use cache::WeightCache;
pub use error::{AppError, Result};
pub use heraldsim_core as core;
