//! Rayon-parallel sweep.

use heraldsim_core::detector::WeightSource;
use heraldsim_core::sweep::{optimize_over_squeezing, TileMap};
use heraldsim_core::{SweepGrid, ThresholdCurve, Tile};
use rayon::prelude::*;

use crate::error::Result;

/// Same output as [`heraldsim_core::sweep::run_sweep`], with tiles
/// evaluated in parallel. Every candidate draws from a seed derived from
/// its own coordinates, so scheduling cannot change the result.
pub fn par_run_sweep(grid: &SweepGrid, curve: &ThresholdCurve, tables: &dyn WeightSource) -> Result<TileMap> {
    grid.validate()?;
    let coords: Vec<(f64, f64)> = grid
        .loss1_values
        .iter()
        .flat_map(|&l1| grid.loss2_values.iter().map(move |&l2| (l1, l2)))
        .collect();
    let tiles = coords
        .par_iter()
        .map(|&(l1, l2)| {
            optimize_over_squeezing(
                l1,
                l2,
                grid.m,
                &grid.detector,
                &grid.campaign,
                &grid.squeezing,
                curve,
                tables,
            )
        })
        .collect::<Result<Vec<Tile>, _>>()?;
    Ok(TileMap::from_tiles(
        grid.loss1_values.clone(),
        grid.loss2_values.clone(),
        tiles,
    )?)
}
