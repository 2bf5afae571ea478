//! Certification of genuine m-photon quantum non-Gaussianity.
//!
//! A state passes when its witness pair `(x_m, y_m)` lies above the
//! threshold curve `F_m`. For a simulated ensemble the whole box
//! `[x̄ ± 3σ_x] × [ȳ ± 3σ_y]` (clipped to the unit square) has to clear the
//! curve: the bottom edge must sit strictly above the largest value `F_m`
//! takes over the box's x-extent.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::montecarlo::EnsembleStats;

/// Half-width of the uncertainty box in standard deviations.
pub const BOX_SIGMAS: f64 = 3.0;

/// Tabulated threshold curve `F_m(x)`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdCurve {
    m: u32,
    points: Vec<(f64, f64)>,
    provenance: String,
}

impl ThresholdCurve {
    /// Validate and wrap samples `(x, F(x))`.
    ///
    /// `x` must be strictly increasing, both coordinates must lie in
    /// `[0, 1]`, `F` must be non-increasing and the curve must stay below
    /// one at `x = 0` so that an ideal Fock state can pass.
    pub fn new(m: u32, points: Vec<(f64, f64)>, provenance: impl Into<String>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidCurve("no samples"));
        }
        for &(x, f) in &points {
            if !(0.0..=1.0).contains(&x) || !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidCurve("sample outside the unit square"));
            }
        }
        for pair in points.windows(2) {
            let ((x0, f0), (x1, f1)) = (pair[0], pair[1]);
            if x1 <= x0 {
                return Err(Error::InvalidCurve("x samples are not strictly increasing"));
            }
            if f1 > f0 {
                return Err(Error::InvalidCurve("F increases with x"));
            }
        }
        if points[0].1 >= 1.0 {
            return Err(Error::InvalidCurve("F(0) must be below 1"));
        }
        Ok(Self {
            m,
            points,
            provenance: provenance.into(),
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// `F_m(x)`, clamped to the end samples outside the tabulated range.
    pub fn threshold_at(&self, x: f64) -> f64 {
        let pts = &self.points;
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        if x <= first.0 {
            return first.1;
        }
        if x >= last.0 {
            return last.1;
        }
        // first index with sample x > query
        let hi = pts.partition_point(|&(px, _)| px <= x);
        let (x0, f0) = pts[hi - 1];
        let (x1, f1) = pts[hi];
        if x == x0 {
            return f0;
        }
        f0 + (f1 - f0) * (x - x0) / (x1 - x0)
    }

    /// Largest value of the interpolated curve on `[lo, hi]`.
    ///
    /// Exact for piecewise-linear curves: the maximum sits at an end of the
    /// interval or at a sample inside it.
    pub fn max_over(&self, lo: f64, hi: f64) -> f64 {
        let mut best = self.threshold_at(lo).max(self.threshold_at(hi));
        for &(x, f) in &self.points {
            if x > lo && x < hi {
                best = best.max(f);
            }
        }
        best
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationVerdict {
    pub pass: bool,
    /// Box bottom minus the curve maximum over the box's x-extent.
    pub margin_y: f64,
    pub box_left: f64,
    pub box_right: f64,
    pub box_bottom: f64,
    pub curve_max: f64,
    pub stats: EnsembleStats,
    pub curve_m: u32,
    pub curve_provenance: String,
}

pub fn certify(stats: &EnsembleStats, curve: &ThresholdCurve) -> Result<CertificationVerdict> {
    if stats.m != curve.m {
        return Err(Error::OrderMismatch {
            curve: curve.m,
            stats: stats.m,
        });
    }
    let box_left = (stats.mean_x - BOX_SIGMAS * stats.sd_x).clamp(0.0, 1.0);
    let box_right = (stats.mean_x + BOX_SIGMAS * stats.sd_x).clamp(0.0, 1.0);
    let box_bottom = (stats.mean_y - BOX_SIGMAS * stats.sd_y).clamp(0.0, 1.0);
    let curve_max = curve.max_over(box_left, box_right);
    let margin_y = box_bottom - curve_max;
    Ok(CertificationVerdict {
        pass: margin_y > 0.0,
        margin_y,
        box_left,
        box_right,
        box_bottom,
        curve_max,
        stats: stats.clone(),
        curve_m: curve.m,
        curve_provenance: curve.provenance.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn stats(m: u32, mean_x: f64, mean_y: f64, sd_x: f64, sd_y: f64) -> EnsembleStats {
        EnsembleStats {
            m,
            mean_x,
            mean_y,
            sd_x,
            sd_y,
            n_samples: 1000,
            runs: 100,
            mean_frequencies: vec![],
        }
    }

    fn two_point() -> ThresholdCurve {
        ThresholdCurve::new(1, vec![(0.0, 0.5), (1.0, 0.0)], "synthetic").unwrap()
    }

    #[test]
    fn loads_valid_curves() {
        let c = two_point();
        assert_eq!(c.m(), 1);
        assert_eq!(c.points().len(), 2);
    }

    #[test]
    fn rejects_invalid_curves() {
        let bad = |pts: Vec<(f64, f64)>| ThresholdCurve::new(4, pts, "t").unwrap_err();
        assert_eq!(bad(vec![]), Error::InvalidCurve("no samples"));
        assert_eq!(
            bad(vec![(0.0, 0.3), (0.5, 0.4)]),
            Error::InvalidCurve("F increases with x")
        );
        assert!(matches!(bad(vec![(0.0, 0.3), (0.0, 0.2)]), Error::InvalidCurve(_)));
        assert!(matches!(bad(vec![(0.0, 1.2)]), Error::InvalidCurve(_)));
        assert!(matches!(bad(vec![(-0.1, 0.2)]), Error::InvalidCurve(_)));
        assert_eq!(
            bad(vec![(0.0, 1.0), (1.0, 0.5)]),
            Error::InvalidCurve("F(0) must be below 1")
        );
    }

    #[test]
    fn interpolation() {
        let c = ThresholdCurve::new(3, vec![(0.2, 0.4), (0.4, 0.2)], "t").unwrap();
        assert_eq!(c.threshold_at(0.2), 0.4);
        assert_eq!(c.threshold_at(0.4), 0.2);
        assert!((c.threshold_at(0.3) - 0.3).abs() < 1e-15);
        assert_eq!(c.threshold_at(0.9), 0.2);
        assert_eq!(c.threshold_at(0.0), 0.4);
    }

    #[test]
    fn ideal_fock_always_passes() {
        let v = certify(&stats(1, 0.0, 1.0, 0.0, 0.0), &two_point()).unwrap();
        assert!(v.pass);
        assert!((v.margin_y - 0.5).abs() < 1e-15);
    }

    #[test]
    fn box_bottom_below_left_edge_fails() {
        // curve at box left edge (0.2) is 0.4; bottom = 0.45 − 3·0.02 = 0.39
        let v = certify(&stats(1, 0.26, 0.45, 0.02, 0.02), &two_point()).unwrap();
        assert!(!v.pass);
        assert!((v.curve_max - 0.4).abs() < 1e-12);
        // the mean alone clears the curve at the mean's x
        assert!(0.45 > two_point().threshold_at(0.26));
    }

    #[test]
    fn zero_width_box_is_pointwise() {
        let c = two_point();
        assert!(certify(&stats(1, 0.2, 0.41, 0.0, 0.0), &c).unwrap().pass);
        // tie is not a pass
        assert!(!certify(&stats(1, 0.2, 0.4, 0.0, 0.0), &c).unwrap().pass);
    }

    #[test]
    fn order_mismatch() {
        assert_eq!(
            certify(&stats(4, 0.0, 1.0, 0.0, 0.0), &two_point()).unwrap_err(),
            Error::OrderMismatch { curve: 1, stats: 4 }
        );
    }

    #[test]
    fn max_over_sees_interior_knots() {
        let c = ThresholdCurve::new(2, vec![(0.0, 0.5), (0.3, 0.5), (0.6, 0.1)], "t").unwrap();
        assert_eq!(c.max_over(0.25, 0.5), 0.5);
        assert!((c.max_over(0.45, 0.6) - 0.3).abs() < 1e-12);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn curve() -> ThresholdCurve {
        ThresholdCurve::new(
            3,
            vec![(0.0, 0.6), (0.1, 0.45), (0.3, 0.42), (0.7, 0.2), (1.0, 0.1)],
            "t",
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn shrinking_the_box_never_hurts(
            mx in 0.0f64..1.0, my in 0.0f64..1.0,
            sx in 0.0f64..0.1, sy in 0.0f64..0.1,
            shrink_x in 0.0f64..=1.0, shrink_y in 0.0f64..=1.0,
        ) {
            let big = EnsembleStats { m: 3, mean_x: mx, mean_y: my, sd_x: sx, sd_y: sy, n_samples: 1, runs: 2, mean_frequencies: vec![] };
            let small = EnsembleStats { sd_x: sx * shrink_x, sd_y: sy * shrink_y, ..big.clone() };
            if certify(&big, &curve()).unwrap().pass {
                prop_assert!(certify(&small, &curve()).unwrap().pass);
            }
        }

        #[test]
        fn threshold_is_non_increasing(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(curve().threshold_at(lo) >= curve().threshold_at(hi));
        }

        #[test]
        fn pass_implies_positive_margin(mx in 0.0f64..1.0, my in 0.0f64..1.0, s in 0.0f64..0.05) {
            let st = EnsembleStats { m: 3, mean_x: mx, mean_y: my, sd_x: s, sd_y: s, n_samples: 1, runs: 2, mean_frequencies: vec![] };
            let v = certify(&st, &curve()).unwrap();
            prop_assert_eq!(v.pass, v.margin_y > 0.0);
        }
    }
}
