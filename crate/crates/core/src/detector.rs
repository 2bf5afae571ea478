//! Heralding detectors.
//!
//! A cascaded avalanche photodiode (CAP) detector splits the light evenly
//! over `n` binary diodes and reports how many fired. The probability that
//! `i` photons fire exactly `m` diodes is
//!
//! ```text
//! w(i, m, n) = C(n, m) Σ_{j=0}^{m} (−1)^j C(m, j) ((m − j)/n)^i
//! ```
//!
//! The alternating sum loses most of its digits once `i` and `m` grow, so
//! weights are generated with the occupancy recurrence instead, which only
//! adds non-negative terms:
//!
//! ```text
//! w(i + 1, m, n) = w(i, m, n) · m/n + w(i, m − 1, n) · (n − m + 1)/n
//! ```
//!
//! Detector inefficiency is not part of the detector: it is folded into the
//! heralding-mode transmittance `ζ₁`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::fock::{self, heralded_element, DiagonalState};
use crate::params::ExperimentParams;

/// Neglected herald probability targeted by the adaptive truncation.
pub const TAIL_TARGET: f64 = 1e-12;
/// Neglected herald probability above which the truncation is rejected.
pub const TAIL_LIMIT: f64 = 1e-10;
const I_MAX_FLOOR: usize = 50;
const I_MAX_CAP: usize = 200_000;
/// Truncations are rounded up to a multiple of this so cached tables are
/// shared between nearby parameter points.
const I_MAX_QUANTUM: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorModel {
    /// Ideal photon-number-resolving detector.
    Pnr,
    /// Cascade of `n` binary avalanche photodiodes.
    Cap { n: u32 },
}

impl DetectorModel {
    pub fn cap(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("a CAP detector needs at least one diode"));
        }
        Ok(Self::Cap { n })
    }

    pub fn validate_outcome(&self, m: u32) -> Result<()> {
        match *self {
            Self::Pnr => Ok(()),
            Self::Cap { n: 0 } => Err(Error::InvalidConfig("a CAP detector needs at least one diode")),
            Self::Cap { n } if m > n => Err(Error::ClickOutOfRange { m, n }),
            Self::Cap { .. } => Ok(()),
        }
    }

    pub fn success_probability(&self, p: &ExperimentParams) -> Result<f64> {
        self.success_probability_with(p, &FreshTables)
    }

    pub fn success_probability_with(&self, p: &ExperimentParams, tables: &dyn WeightSource) -> Result<f64> {
        p.validate()?;
        self.validate_outcome(p.m)?;
        match *self {
            Self::Pnr => Ok(fock::success_probability(p)),
            Self::Cap { n } => cap_success_probability_with(p, n, tables),
        }
    }

    pub fn heralded_diagonals(&self, p: &ExperimentParams, cutoff: usize) -> Result<DiagonalState> {
        self.heralded_diagonals_with(p, cutoff, &FreshTables)
    }

    pub fn heralded_diagonals_with(
        &self,
        p: &ExperimentParams,
        cutoff: usize,
        tables: &dyn WeightSource,
    ) -> Result<DiagonalState> {
        self.validate_outcome(p.m)?;
        match *self {
            Self::Pnr => fock::heralded_diagonals(p, cutoff),
            Self::Cap { n } => cap_heralded_diagonals_with(p, n, cutoff, tables),
        }
    }
}

/// Click probabilities `w(i, m, n)` for `0 ≤ i ≤ i_max` and
/// `0 ≤ m ≤ min(i, max_clicks)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickWeightTable {
    n: u32,
    max_clicks: u32,
    rows: Vec<Vec<f64>>,
}

impl ClickWeightTable {
    /// Full table, every click count up to `n`.
    pub fn build(n: u32, i_max: usize) -> Result<Self> {
        Self::build_columns(n, i_max, n)
    }

    /// Table restricted to click counts `m ≤ max_clicks`. The recurrence for
    /// column `m` only reads columns `≤ m`, so the entries are identical to
    /// those of the full table.
    pub fn build_columns(n: u32, i_max: usize, max_clicks: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidConfig("a CAP detector needs at least one diode"));
        }
        let max_clicks = max_clicks.min(n);
        let nf = n as f64;
        let mut rows = Vec::with_capacity(i_max + 1);
        let mut row = vec![1.0];
        for _ in 0..i_max {
            let width = (row.len() + 1).min(max_clicks as usize + 1);
            let mut next = vec![0.0; width];
            for (m, slot) in next.iter_mut().enumerate() {
                let stay = row.get(m).map_or(0.0, |w| w * m as f64 / nf);
                let fresh = if m == 0 {
                    0.0
                } else {
                    row.get(m - 1).map_or(0.0, |w| w * (nf - (m - 1) as f64) / nf)
                };
                *slot = stay + fresh;
            }
            rows.push(core::mem::replace(&mut row, next));
        }
        rows.push(row);
        Ok(Self { n, max_clicks, rows })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn max_clicks(&self) -> u32 {
        self.max_clicks
    }

    pub fn i_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `w(i, m, n)`; zero outside the table's support.
    pub fn get(&self, i: usize, m: u32) -> f64 {
        self.rows.get(i).and_then(|r| r.get(m as usize)).copied().unwrap_or(0.0)
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.rows[i]
    }
}

/// Provider of click-weight tables. The `heraldsim` crate implements a
/// shared cache; [`FreshTables`] builds a new table on every call.
pub trait WeightSource: Sync {
    /// A table for `n` diodes covering at least `i_max` incident photons and
    /// click counts up to `max_clicks`.
    fn table(&self, n: u32, i_max: usize, max_clicks: u32) -> Result<Arc<ClickWeightTable>>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct FreshTables;

impl WeightSource for FreshTables {
    fn table(&self, n: u32, i_max: usize, max_clicks: u32) -> Result<Arc<ClickWeightTable>> {
        ClickWeightTable::build_columns(n, i_max, max_clicks).map(Arc::new)
    }
}

/// `w(i, m, n)` for a single entry.
pub fn cap_weight(i: u32, m: u32, n: u32) -> f64 {
    if n == 0 || m > n || m > i {
        return if i == 0 && m == 0 { 1.0 } else { 0.0 };
    }
    // Only columns ≤ m are needed.
    let nf = n as f64;
    let mut col = vec![0.0; m as usize + 1];
    col[0] = 1.0;
    for _ in 0..i {
        for j in (0..=m as usize).rev() {
            let stay = col[j] * j as f64 / nf;
            let fresh = if j == 0 {
                0.0
            } else {
                col[j - 1] * (nf - (j - 1) as f64) / nf
            };
            col[j] = stay + fresh;
        }
    }
    col[m as usize]
}

/// Ratio `P_(i+1) / P_(i)` of consecutive PNR herald probabilities; the
/// herald tail beyond `I` is exactly `ratio^{I+1}`.
fn herald_ratio(p: &ExperimentParams) -> f64 {
    let l2 = p.lambda_squared();
    l2 * p.zeta1 / (1.0 - l2 * (1.0 - p.zeta1))
}

/// Incident-photon truncation for the CAP sums and the bound on the herald
/// probability it neglects.
pub fn cap_truncation(p: &ExperimentParams, n: u32) -> Result<(usize, f64)> {
    let ratio = herald_ratio(p);
    let floor = I_MAX_FLOOR.max(5 * n as usize);
    let needed = if ratio <= 0.0 {
        0
    } else {
        // smallest I with ratio^{I+1} < TAIL_TARGET
        let exact = TAIL_TARGET.ln() / ratio.ln() - 1.0;
        if exact.is_finite() {
            exact.max(0.0).floor() as usize + 1
        } else {
            I_MAX_CAP + 1
        }
    };
    let i_max = floor.max(needed).div_ceil(I_MAX_QUANTUM) * I_MAX_QUANTUM;
    let i_max = i_max.min(I_MAX_CAP);
    let bound = if ratio <= 0.0 {
        0.0
    } else {
        ratio.powi(i_max as i32 + 1)
    };
    if bound > TAIL_LIMIT {
        return Err(Error::TruncationInsufficient {
            cutoff: i_max,
            deficit: bound,
        });
    }
    Ok((i_max, bound))
}

pub fn cap_success_probability(p: &ExperimentParams, n: u32) -> Result<f64> {
    cap_success_probability_with(p, n, &FreshTables)
}

/// `P_(m,n) = Σ_i w(i, m, n) P_(i)`.
pub fn cap_success_probability_with(p: &ExperimentParams, n: u32, tables: &dyn WeightSource) -> Result<f64> {
    p.validate()?;
    DetectorModel::cap(n)?.validate_outcome(p.m)?;
    let (i_max, _) = cap_truncation(p, n)?;
    let table = tables.table(n, i_max, p.m)?;
    Ok((p.m as usize..=i_max)
        .map(|i| table.get(i, p.m) * fock::success_probability(&p.with_m(i as u32)))
        .sum())
}

pub fn cap_heralded_diagonals(p: &ExperimentParams, n: u32, cutoff: usize) -> Result<DiagonalState> {
    cap_heralded_diagonals_with(p, n, cutoff, &FreshTables)
}

/// `ρ_(m,n) = Σ_i w(i, m, n) P_(i) ρ_(i) / P_(m,n)`, diagonals only.
pub fn cap_heralded_diagonals_with(
    p: &ExperimentParams,
    n: u32,
    cutoff: usize,
    tables: &dyn WeightSource,
) -> Result<DiagonalState> {
    p.validate()?;
    DetectorModel::cap(n)?.validate_outcome(p.m)?;
    if cutoff == 0 {
        return Err(Error::InvalidConfig("cutoff must be positive"));
    }
    let (i_max, _) = cap_truncation(p, n)?;
    let table = tables.table(n, i_max, p.m)?;
    let mut acc = vec![0.0; cutoff];
    let mut total = 0.0;
    for i in p.m as usize..=i_max {
        let herald_i = p.with_m(i as u32);
        let weight = table.get(i, p.m) * fock::success_probability(&herald_i);
        if weight == 0.0 {
            continue;
        }
        total += weight;
        for (k, slot) in acc.iter_mut().enumerate() {
            *slot += weight * heralded_element(&herald_i, k as u32)?;
        }
    }
    if total == 0.0 {
        return Err(Error::DegenerateHerald { m: p.m });
    }
    for v in &mut acc {
        *v /= total;
    }
    let sum: f64 = acc.iter().sum();
    if sum > 1.0 {
        // rounding only; renormalize the last few ulps
        for v in &mut acc {
            *v /= sum;
        }
    }
    DiagonalState::from_probs(acc)
}
