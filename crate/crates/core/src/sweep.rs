//! Loss-plane sweeps.
//!
//! Every tile of the (heralding loss, characterization loss) grid is
//! evaluated on a grid of squeezing values; the tile reports the largest
//! herald probability among candidates that certify. Candidates below
//! [`MIN_SUCCESS_PROBABILITY`] are never simulated.
//!
//! Each candidate's campaign seed is derived from the base seed and the bit
//! patterns of its losses, squeezing and target, so a tile's result does
//! not depend on grid layout or evaluation order.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::certify::{certify, ThresholdCurve};
use crate::detector::{DetectorModel, WeightSource};
use crate::error::{Error, Result};
use crate::montecarlo::{derive_seed, samples_for_probability, simulate_state, CampaignConfig};
use crate::params::{ExperimentParams, SqueezeParam};
use crate::MIN_SUCCESS_PROBABILITY;

/// Largest squeezing considered by sweeps, in dB.
pub const MAX_SQUEEZING_DB: f64 = 10.0;
pub const DEFAULT_DB_STEP: f64 = 0.25;

/// Uniform squeezing grid `0, step, …, max_db` (inclusive).
pub fn db_grid(step: f64, max_db: f64) -> Result<Vec<SqueezeParam>> {
    if step.is_nan() || step <= 0.0 || !(0.0..=MAX_SQUEEZING_DB).contains(&max_db) {
        return Err(Error::InvalidConfig(
            "squeezing grid needs step > 0 and 0 <= max <= 10 dB",
        ));
    }
    let count = (max_db / step + 1e-9).floor() as usize;
    (0..=count).map(|i| SqueezeParam::from_db(i as f64 * step)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    /// Heralding-mode losses `1 − ζ₁`.
    pub loss1_values: Vec<f64>,
    /// Characterization (signal-mode) losses `1 − ζ₂`.
    pub loss2_values: Vec<f64>,
    pub squeezing: Vec<SqueezeParam>,
    pub m: u32,
    pub detector: DetectorModel,
    pub campaign: CampaignConfig,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.loss1_values.is_empty() || self.loss2_values.is_empty() || self.squeezing.is_empty() {
            return Err(Error::InvalidConfig("sweep grids must be non-empty"));
        }
        for &l in self.loss1_values.iter().chain(&self.loss2_values) {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::Domain {
                    name: "loss",
                    value: l,
                    domain: "[0, 1]",
                });
            }
        }
        let r_max = SqueezeParam::from_db(MAX_SQUEEZING_DB)?.rate();
        if self.squeezing.iter().any(|s| s.rate() > r_max * (1.0 + 1e-12)) {
            return Err(Error::InvalidConfig("squeezing grid exceeds 10 dB"));
        }
        self.detector.validate_outcome(self.m)?;
        self.campaign.validate(self.m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TileStatus {
    Certified,
    Uncertifiable,
    /// No squeezing value reaches the minimal herald probability.
    Insignificant,
}

impl TileStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Certified => "certified",
            Self::Uncertifiable => "uncertifiable",
            Self::Insignificant => "insignificant",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub loss1: f64,
    pub loss2: f64,
    pub status: TileStatus,
    /// Herald probability of the best certified candidate.
    pub best_probability: Option<f64>,
    pub best_squeezing: Option<SqueezeParam>,
    /// `⟨m|ρ|m⟩` of the analytic state at the best candidate.
    pub fidelity: Option<f64>,
    /// Largest herald probability over the whole squeezing grid.
    pub max_probability: f64,
}

/// Evaluate one tile: scan the squeezing grid and keep the certified
/// candidate with the largest herald probability.
#[allow(clippy::too_many_arguments)]
pub fn optimize_over_squeezing(
    loss1: f64,
    loss2: f64,
    m: u32,
    det: &DetectorModel,
    campaign: &CampaignConfig,
    squeezing: &[SqueezeParam],
    curve: &ThresholdCurve,
    tables: &dyn WeightSource,
) -> Result<Tile> {
    if curve.m() != m {
        return Err(Error::OrderMismatch {
            curve: curve.m(),
            stats: m,
        });
    }
    campaign.validate(m)?;
    let (zeta1, zeta2) = (1.0 - loss1, 1.0 - loss2);
    let mut max_probability: f64 = 0.0;
    let mut best: Option<(f64, SqueezeParam, f64)> = None;
    for &sq in squeezing {
        let p = ExperimentParams::new(sq, zeta1, zeta2, m)?;
        let probability = det.success_probability_with(&p, tables)?;
        max_probability = max_probability.max(probability);
        if probability < MIN_SUCCESS_PROBABILITY {
            continue;
        }
        let n_samples = match samples_for_probability(probability, campaign.repetitions) {
            Ok(n) => n,
            Err(Error::InsufficientSamples { .. }) => continue,
            Err(e) => return Err(e),
        };
        let state = det.heralded_diagonals_with(&p, campaign.sample_cutoff, tables)?;
        let seed = candidate_seed(campaign.seed, loss1, loss2, sq, m, det);
        let stats = simulate_state(&state, m, n_samples, &campaign.with_seed(seed))?;
        let verdict = certify(&stats, curve)?;
        if verdict.pass && best.is_none_or(|(bp, _, _)| probability > bp) {
            best = Some((probability, sq, state.get(m as usize)));
        }
    }
    let status = match best {
        Some(_) => TileStatus::Certified,
        None if max_probability < MIN_SUCCESS_PROBABILITY => TileStatus::Insignificant,
        None => TileStatus::Uncertifiable,
    };
    Ok(Tile {
        loss1,
        loss2,
        status,
        best_probability: best.map(|b| b.0),
        best_squeezing: best.map(|b| b.1),
        fidelity: best.map(|b| b.2),
        max_probability,
    })
}

fn candidate_seed(seed: u64, loss1: f64, loss2: f64, sq: SqueezeParam, m: u32, det: &DetectorModel) -> u64 {
    let det_code = match det {
        DetectorModel::Pnr => 0,
        DetectorModel::Cap { n } => 1 + *n as u64,
    };
    derive_seed(
        seed,
        &[
            loss1.to_bits(),
            loss2.to_bits(),
            sq.rate().to_bits(),
            m as u64,
            det_code,
        ],
    )
}

/// Tiles of a sweep, stored row-major with heralding loss as the outer index.
#[derive(Debug, Clone, PartialEq)]
pub struct TileMap {
    pub loss1_values: Vec<f64>,
    pub loss2_values: Vec<f64>,
    pub tiles: Vec<Tile>,
}

impl TileMap {
    pub fn from_tiles(loss1_values: Vec<f64>, loss2_values: Vec<f64>, tiles: Vec<Tile>) -> Result<Self> {
        if tiles.len() != loss1_values.len() * loss2_values.len() {
            return Err(Error::InvalidConfig("tile count does not match the grid"));
        }
        Ok(Self {
            loss1_values,
            loss2_values,
            tiles,
        })
    }

    pub fn get(&self, i1: usize, i2: usize) -> &Tile {
        &self.tiles[i1 * self.loss2_values.len() + i2]
    }

    /// Non-certified tiles that have strictly less loss (in the
    /// componentwise order) than some certified tile. Each is a candidate
    /// Monte Carlo noise exception.
    pub fn monotonicity_exceptions(&self) -> Vec<(usize, usize)> {
        let (n1, n2) = (self.loss1_values.len(), self.loss2_values.len());
        let mut out = Vec::new();
        for i1 in 0..n1 {
            for i2 in 0..n2 {
                let here = self.get(i1, i2);
                if here.status == TileStatus::Certified {
                    continue;
                }
                let dominated_certified = (0..n1).any(|j1| {
                    (0..n2).any(|j2| {
                        let other = self.get(j1, j2);
                        other.status == TileStatus::Certified && other.loss1 >= here.loss1 && other.loss2 >= here.loss2
                    })
                });
                if dominated_certified {
                    out.push((i1, i2));
                }
            }
        }
        out
    }
}

/// Sequential sweep over every tile of `grid`.
pub fn run_sweep(grid: &SweepGrid, curve: &ThresholdCurve, tables: &dyn WeightSource) -> Result<TileMap> {
    grid.validate()?;
    let mut tiles = Vec::with_capacity(grid.loss1_values.len() * grid.loss2_values.len());
    for &l1 in &grid.loss1_values {
        for &l2 in &grid.loss2_values {
            tiles.push(optimize_over_squeezing(
                l1,
                l2,
                grid.m,
                &grid.detector,
                &grid.campaign,
                &grid.squeezing,
                curve,
                tables,
            )?);
        }
    }
    TileMap::from_tiles(grid.loss1_values.clone(), grid.loss2_values.clone(), tiles)
}

/// Maximal tolerable characterization loss for each heralding loss.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityContour {
    /// `(heralding loss, max characterization loss)`, `None` where no tile
    /// of the column is feasible. Sorted by heralding loss.
    pub boundary: Vec<(f64, Option<f64>)>,
}

impl FeasibilityContour {
    /// Columns where the tolerable characterization loss rises with
    /// heralding loss (flagged as Monte Carlo noise, not corrected).
    pub fn non_monotone_points(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut prev: Option<f64> = None;
        for (idx, &(_, v)) in self.boundary.iter().enumerate() {
            let v = v.unwrap_or(f64::NEG_INFINITY);
            if let Some(p) = prev {
                if v > p {
                    out.push(idx);
                }
            }
            prev = Some(v);
        }
        out
    }
}

/// For every heralding-loss column, the largest characterization loss whose
/// tile is certified with probability at least [`MIN_SUCCESS_PROBABILITY`].
pub fn extract_thresholds(map: &TileMap) -> FeasibilityContour {
    let mut boundary: Vec<(f64, Option<f64>)> = (0..map.loss1_values.len())
        .map(|i1| {
            let best = (0..map.loss2_values.len())
                .map(|i2| map.get(i1, i2))
                .filter(|t| {
                    t.status == TileStatus::Certified
                        && t.best_probability.is_some_and(|p| p >= MIN_SUCCESS_PROBABILITY)
                })
                .map(|t| t.loss2)
                .fold(None, |acc: Option<f64>, l| Some(acc.map_or(l, |a| a.max(l))));
            (map.loss1_values[i1], best)
        })
        .collect();
    boundary.sort_by(|a, b| a.0.total_cmp(&b.0));
    FeasibilityContour { boundary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detector::FreshTables;
    use crate::fock::success_probability;
    use alloc::vec;

    fn curve(m: u32, f0: f64) -> ThresholdCurve {
        ThresholdCurve::new(m, vec![(0.0, f0), (1.0, f0 * 0.8)], "synthetic").unwrap()
    }

    fn tile(loss1: f64, loss2: f64, status: TileStatus, p: Option<f64>) -> Tile {
        Tile {
            loss1,
            loss2,
            status,
            best_probability: p,
            best_squeezing: None,
            fidelity: None,
            max_probability: p.unwrap_or(0.0),
        }
    }

    #[test]
    fn db_grid_default() {
        let g = db_grid(DEFAULT_DB_STEP, MAX_SQUEEZING_DB).unwrap();
        assert_eq!(g.len(), 41);
        assert_eq!(g[0].rate(), 0.0);
        assert!((g[40].db() - 10.0).abs() < 1e-12);
        assert!(db_grid(0.0, 10.0).is_err());
        assert!(db_grid(0.5, 11.0).is_err());
    }

    #[test]
    fn lossless_tile_certifies_at_max_squeezing() {
        let grid = db_grid(1.0, 10.0).unwrap();
        // herald probability grows with λ over the whole grid at ζ₁ = 1
        let probs: Vec<f64> = grid
            .iter()
            .map(|&s| success_probability(&ExperimentParams::new(s, 1.0, 1.0, 3).unwrap()))
            .collect();
        assert!(probs.windows(2).all(|w| w[1] > w[0]));
        let t = optimize_over_squeezing(
            0.0,
            0.0,
            3,
            &DetectorModel::Pnr,
            &CampaignConfig::fast(5),
            &grid,
            &curve(3, 0.4),
            &FreshTables,
        )
        .unwrap();
        assert_eq!(t.status, TileStatus::Certified);
        assert_eq!(t.best_squeezing, Some(grid[10]));
        assert_eq!(t.fidelity, Some(1.0));
        assert_eq!(t.best_probability, Some(probs[10]));
    }

    #[test]
    fn dark_herald_is_insignificant() {
        let grid = db_grid(0.25, 10.0).unwrap();
        let max = grid
            .iter()
            .map(|&s| success_probability(&ExperimentParams::new(s, 0.01, 1.0, 5).unwrap()))
            .fold(0.0, f64::max);
        assert!(max < MIN_SUCCESS_PROBABILITY);
        let t = optimize_over_squeezing(
            0.99,
            0.0,
            5,
            &DetectorModel::Pnr,
            &CampaignConfig::fast(5),
            &grid,
            &curve(5, 0.4),
            &FreshTables,
        )
        .unwrap();
        assert_eq!(t.status, TileStatus::Insignificant);
        assert_eq!(t.fidelity, None);
    }

    #[test]
    fn impossible_curve_is_uncertifiable() {
        let grid = db_grid(2.0, 10.0).unwrap();
        let wall = ThresholdCurve::new(3, vec![(0.0, 0.999_999_9), (1.0, 0.999_999_9)], "wall").unwrap();
        let t = optimize_over_squeezing(
            0.1,
            0.1,
            3,
            &DetectorModel::Pnr,
            &CampaignConfig::fast(5),
            &grid,
            &wall,
            &FreshTables,
        )
        .unwrap();
        assert_eq!(t.status, TileStatus::Uncertifiable);
        assert_eq!(t.best_probability, None);
    }

    #[test]
    fn curve_order_must_match() {
        let grid = db_grid(2.0, 10.0).unwrap();
        let e = optimize_over_squeezing(
            0.0,
            0.0,
            3,
            &DetectorModel::Pnr,
            &CampaignConfig::fast(0),
            &grid,
            &curve(4, 0.4),
            &FreshTables,
        );
        assert_eq!(e.unwrap_err(), Error::OrderMismatch { curve: 4, stats: 3 });
    }

    #[test]
    fn one_by_one_sweep_is_a_tile() {
        let grid = SweepGrid {
            loss1_values: vec![0.1],
            loss2_values: vec![0.05],
            squeezing: db_grid(2.5, 10.0).unwrap(),
            m: 3,
            detector: DetectorModel::Pnr,
            campaign: CampaignConfig::fast(17),
        };
        let c = curve(3, 0.4);
        let map = run_sweep(&grid, &c, &FreshTables).unwrap();
        let t = optimize_over_squeezing(
            0.1,
            0.05,
            3,
            &DetectorModel::Pnr,
            &grid.campaign,
            &grid.squeezing,
            &c,
            &FreshTables,
        )
        .unwrap();
        assert_eq!(map.tiles, vec![t]);
    }

    #[test]
    fn contour_all_certified() {
        let l = vec![0.0, 0.1, 0.2];
        let tiles = l
            .iter()
            .flat_map(|&a| l.iter().map(move |&b| tile(a, b, TileStatus::Certified, Some(0.01))))
            .collect();
        let map = TileMap::from_tiles(l.clone(), l.clone(), tiles).unwrap();
        let c = extract_thresholds(&map);
        assert_eq!(c.boundary, vec![(0.0, Some(0.2)), (0.1, Some(0.2)), (0.2, Some(0.2))]);
    }

    #[test]
    fn contour_all_insignificant() {
        let l = vec![0.0, 0.5];
        let tiles = l
            .iter()
            .flat_map(|&a| l.iter().map(move |&b| tile(a, b, TileStatus::Insignificant, None)))
            .collect();
        let map = TileMap::from_tiles(l.clone(), l.clone(), tiles).unwrap();
        assert!(extract_thresholds(&map).boundary.iter().all(|(_, v)| v.is_none()));
    }

    #[test]
    fn contour_reproduces_a_step() {
        let l1 = vec![0.0, 0.1, 0.2, 0.3];
        let l2 = vec![0.0, 0.05, 0.1, 0.15];
        // certified while loss2 <= step(loss1)
        let step = |a: f64| if a < 0.15 { 0.1 } else { 0.0 };
        let tiles = l1
            .iter()
            .flat_map(|&a| {
                l2.iter().map(move |&b| {
                    if b <= step(a) {
                        tile(a, b, TileStatus::Certified, Some(1e-3))
                    } else {
                        tile(a, b, TileStatus::Uncertifiable, None)
                    }
                })
            })
            .collect();
        let map = TileMap::from_tiles(l1, l2, tiles).unwrap();
        let c = extract_thresholds(&map);
        assert_eq!(
            c.boundary,
            vec![(0.0, Some(0.1)), (0.1, Some(0.1)), (0.2, Some(0.0)), (0.3, Some(0.0))]
        );
        assert!(c.non_monotone_points().is_empty());
        assert!(map.monotonicity_exceptions().is_empty());
    }

    #[test]
    fn low_probability_certified_tiles_excluded_from_contour() {
        let map = TileMap::from_tiles(
            vec![0.0],
            vec![0.0],
            vec![tile(0.0, 0.0, TileStatus::Certified, Some(5e-6))],
        )
        .unwrap();
        assert_eq!(extract_thresholds(&map).boundary, vec![(0.0, None)]);
    }

    #[test]
    fn monotonicity_flags_holes() {
        let l = vec![0.0, 0.1];
        let tiles = vec![
            tile(0.0, 0.0, TileStatus::Uncertifiable, None),
            tile(0.0, 0.1, TileStatus::Certified, Some(0.1)),
            tile(0.1, 0.0, TileStatus::Certified, Some(0.1)),
            tile(0.1, 0.1, TileStatus::Uncertifiable, None),
        ];
        let map = TileMap::from_tiles(l.clone(), l, tiles).unwrap();
        assert_eq!(map.monotonicity_exceptions(), vec![(0, 0)]);
    }
}
