//! Heralded Fock-state preparation from two-mode squeezed vacuum under loss.
//!
//! The crate is `no_std` (with `alloc`) and covers the numerical side of the
//! pipeline:
//!
//! * [`fock`]: closed-form diagonals of the heralded state and the herald
//!   success probability for an ideal photon-number-resolving detector.
//! * [`oracle`]: brute-force Kraus-channel evaluation of the same quantities,
//!   used only for cross-validation.
//! * [`detector`]: cascaded avalanche photodiode (CAP) heralding.
//! * [`montecarlo`]: finite-sample emulation of an experimental campaign.
//! * [`certify`]: three-sigma box test against tabulated threshold curves.
//! * [`sweep`]: loss-plane sweeps maximized over squeezing.
//!
//! IO, the weight-table cache, parallel sweeps and the CLI live in the
//! `heraldsim` crate.
#![no_std]
// `num_traits::Float` supplies libm-backed float math; whenever std is
// linked into the build its inherent methods win and the import goes unused.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod certify;
pub mod detector;
mod error;
pub mod fock;
pub(crate) mod math;
pub mod montecarlo;
pub mod oracle;
pub mod params;
pub mod sweep;

pub use certify::{certify, CertificationVerdict, ThresholdCurve};
pub use detector::{ClickWeightTable, DetectorModel};
pub use error::Error;
pub use fock::{heralded_diagonals, series_h, success_probability, DiagonalState};
pub use montecarlo::{simulate_ensemble, CampaignConfig, EnsembleStats, Histogram};
pub use params::{db_to_rate, rate_to_db, ExperimentParams, SqueezeParam};
pub use sweep::{FeasibilityContour, SweepGrid, Tile, TileStatus};

/// Herald success probability below which a configuration is treated as
/// statistically insignificant.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-5;

/// Smallest per-run sample count considered statistically meaningful.
pub const MIN_SAMPLES_PER_RUN: u64 = 1000;
