//! Closed-form model of the heralded state for an ideal photon-number
//! resolving (PNR) heralding detector.
//!
//! With `A = 1 − λ²(1 − ζ₁)`, `x = λ²(1 − ζ₁)(1 − ζ₂)`, `τ = max(k, m)` and
//! `F(k, m, x) = Σ_{l ≥ τ} C(l, m) C(l, k) x^{l − τ}` the normalized
//! diagonals are
//!
//! ```text
//! ⟨k|ρ_m|k⟩ = A^{m+1} ζ₂^k (λ²(1 − ζ₁))^{τ − m} (1 − ζ₂)^{τ − k} F(k, m, x)
//! ```
//!
//! Every power has a non-negative exponent, so the lossless and vacuum
//! limits evaluate without 0/0. All terms are combined in log space.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::math::{ln_binomial, ln_pow};
use crate::params::ExperimentParams;

const MAX_SERIES_TERMS: usize = 100_000;
const TERM_REL_TOL: f64 = 1e-15;
const TAIL_REL_TOL: f64 = 1e-14;

/// Normalized Fock-basis diagonal of a state, truncated at `cutoff` with the
/// remaining probability kept in `tail_mass`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalState {
    probs: Vec<f64>,
    tail_mass: f64,
}

impl DiagonalState {
    /// Wrap already-normalized probabilities. The tail is whatever the
    /// entries leave over, clamped at zero.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidConfig("diagonal state needs a positive cutoff"));
        }
        if probs.iter().any(|p| p.is_nan() || *p < 0.0) {
            return Err(Error::InvalidConfig("diagonal probabilities must be non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if total > 1.0 + 1e-9 {
            return Err(Error::InvalidConfig("diagonal probabilities sum above one"));
        }
        Ok(Self {
            probs,
            tail_mass: (1.0 - total).max(0.0),
        })
    }

    /// Fock state `|n⟩` truncated at `cutoff`.
    pub fn fock(n: usize, cutoff: usize) -> Result<Self> {
        let mut probs = alloc::vec![0.0; cutoff.max(1)];
        if n < probs.len() {
            probs[n] = 1.0;
        }
        Self::from_probs(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    pub fn cutoff(&self) -> usize {
        self.probs.len()
    }

    /// `⟨k|ρ|k⟩`, zero beyond the cutoff.
    pub fn get(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }
}

/// `ln F(k, m, x)` where `F(k, m, x) = Σ_{l ≥ τ} C(l, m) C(l, k) x^{l − τ}`.
///
/// Terms are generated by their exact ratio, which decreases monotonically
/// towards `x`; once it drops below one the remaining tail is bounded by a
/// geometric series in the current ratio.
pub(crate) fn ln_series_f(k: u32, m: u32, x: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            domain: "0 <= x < 1",
        });
    }
    let tau = k.max(m) as u64;
    let kappa = k.min(m) as u64;
    // Leading term is C(τ, τ) C(τ, κ) = C(τ, κ).
    let ln_lead = ln_binomial(tau, kappa);
    if x == 0.0 {
        return Ok(ln_lead);
    }

    let (k, m) = (k as f64, m as f64);
    let mut sum = 1.0;
    let mut term = 1.0;
    let mut l = tau as f64;
    for _ in 0..MAX_SERIES_TERMS {
        let ratio = x * (l + 1.0) * (l + 1.0) / ((l + 1.0 - m) * (l + 1.0 - k));
        term *= ratio;
        sum += term;
        l += 1.0;
        if ratio < 1.0 {
            let next = x * (l + 1.0) * (l + 1.0) / ((l + 1.0 - m) * (l + 1.0 - k));
            let tail = term * next / (1.0 - next);
            if term < TERM_REL_TOL * sum && tail < TAIL_REL_TOL * sum {
                return Ok(ln_lead + sum.ln());
            }
        }
    }
    Err(Error::SeriesNotConverged {
        terms: MAX_SERIES_TERMS,
    })
}

/// `H(k, m, x) = Σ_{l ≥ max(k, m)} C(l, m) C(l, k) x^l`.
pub fn series_h(k: u32, m: u32, x: f64) -> Result<f64> {
    let ln_f = ln_series_f(k, m, x)?;
    let tau = k.max(m) as u64;
    Ok(match ln_pow(x, tau) {
        Some(ln_x_tau) => (ln_x_tau + ln_f).exp(),
        None => 0.0,
    })
}

/// Probability that the heralding detector registers exactly `m` photons.
pub fn success_probability(p: &ExperimentParams) -> f64 {
    let l2 = p.lambda_squared();
    let a = 1.0 - l2 * (1.0 - p.zeta1);
    let m = p.m as i32;
    (1.0 - l2) * (l2 * p.zeta1).powi(m) / a.powi(m + 1)
}

/// `⟨k|ρ_m|k⟩` for a single `k`, divergence-safe.
pub(crate) fn heralded_element(p: &ExperimentParams, k: u32) -> Result<f64> {
    let l2 = p.lambda_squared();
    let loss1 = 1.0 - p.zeta1;
    let loss2 = 1.0 - p.zeta2;
    let a = 1.0 - l2 * loss1;
    let m = p.m;
    let tau = k.max(m) as u64;

    let mut ln = (m as f64 + 1.0) * a.ln();
    for (base, exponent) in [
        (p.zeta2, k as u64),
        (l2, tau - m as u64),
        (loss1, tau - m as u64),
        (loss2, tau - k as u64),
    ] {
        match ln_pow(base, exponent) {
            Some(v) => ln += v,
            None => return Ok(0.0),
        }
    }
    Ok((ln + ln_series_f(k, m, p.series_arg())?).exp())
}

/// Normalized diagonals of the state heralded on `p.m` photons with an
/// ideal PNR detector.
pub fn heralded_diagonals(p: &ExperimentParams, cutoff: usize) -> Result<DiagonalState> {
    p.validate()?;
    if cutoff < p.m as usize + 1 {
        return Err(Error::InvalidConfig("cutoff must exceed the heralded photon number"));
    }
    if success_probability(p) == 0.0 {
        return Err(Error::DegenerateHerald { m: p.m });
    }
    let probs = (0..cutoff as u32)
        .map(|k| heralded_element(p, k))
        .collect::<Result<Vec<_>>>()?;
    let total: f64 = probs.iter().sum();
    Ok(DiagonalState {
        probs,
        tail_mass: (1.0 - total).max(0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::binomial;
    use crate::params::SqueezeParam;

    fn params(lambda2: f64, zeta1: f64, zeta2: f64, m: u32) -> ExperimentParams {
        ExperimentParams::new(SqueezeParam::from_lambda_squared(lambda2).unwrap(), zeta1, zeta2, m).unwrap()
    }

    /// Plain partial summation of the defining series with an explicit
    /// geometric tail bound, independent of the ratio recurrence.
    fn brute_h(k: u32, m: u32, x: f64) -> f64 {
        let tau = k.max(m) as u64;
        let mut sum = 0.0;
        let mut l = tau;
        loop {
            let t = binomial(l, m as u64) * binomial(l, k as u64) * x.powi(l as i32);
            sum += t;
            l += 1;
            if l > tau + 10 && t * x / (1.0 - x) < 1e-16 * sum.max(1e-300) || l > 5000 {
                return sum;
            }
        }
    }

    #[test]
    fn geometric_series() {
        assert!((series_h(0, 0, 0.5).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn zero_argument_kills_positive_powers() {
        assert_eq!(series_h(1, 0, 0.0).unwrap(), 0.0);
        assert_eq!(series_h(0, 0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn h_one_one_half() {
        // Σ l² x^l = x(1 + x)/(1 − x)³ = 6 at x = 1/2.
        let closed = 0.5 * 1.5 / 0.125;
        assert!((brute_h(1, 1, 0.5) - closed).abs() < 1e-12);
        assert!((series_h(1, 1, 0.5).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn h_against_partial_sums() {
        for &(k, m) in &[(0, 3), (2, 5), (7, 7), (12, 4), (20, 19)] {
            for &x in &[0.05, 0.3, 0.7] {
                let want = brute_h(k, m, x);
                let got = series_h(k, m, x).unwrap();
                assert!((got - want).abs() <= 1e-11 * want, "H({k},{m},{x}) {got} vs {want}");
            }
        }
    }

    #[test]
    fn h_domain() {
        assert!(matches!(series_h(1, 1, 1.0), Err(Error::Domain { .. })));
        assert!(series_h(1, 1, -0.1).is_err());
    }

    #[test]
    fn h_large_orders_stay_finite() {
        let v = series_h(60, 60, 0.9).unwrap();
        assert!(v.is_finite() && v > 0.0);
        assert_eq!(v, series_h(60, 60, 0.9).unwrap());
        let a = series_h(60, 35, 0.8).unwrap();
        let b = series_h(35, 60, 0.8).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn success_probability_values() {
        let vac = params(0.0, 0.3, 0.5, 0);
        assert_eq!(success_probability(&vac), 1.0);
        assert_eq!(success_probability(&vac.with_m(3)), 0.0);
        // 0.5 · 0.4 / 0.9² = 20/81
        let p = params(0.5, 0.8, 1.0, 1);
        assert!((success_probability(&p) - 20.0 / 81.0).abs() < 1e-15);
    }

    #[test]
    fn success_probabilities_sum_to_one() {
        let p = params(0.5, 0.8, 1.0, 0);
        let total: f64 = (0..=40).map(|m| success_probability(&p.with_m(m))).sum();
        assert!(total > 1.0 - 1e-8 && total <= 1.0 + 1e-12);
    }

    #[test]
    fn lossless_gives_fock_state() {
        let p = params(0.5, 1.0, 1.0, 3);
        let s = heralded_diagonals(&p, 20).unwrap();
        for (k, &v) in s.probs().iter().enumerate() {
            assert_eq!(v, if k == 3 { 1.0 } else { 0.0 });
        }
        assert_eq!(s.tail_mass(), 0.0);
    }

    #[test]
    fn lossy_fock_is_binomial() {
        let p = params(0.3, 1.0, 0.9, 2);
        let s = heralded_diagonals(&p, 10).unwrap();
        let want = [0.01, 2.0 * 0.9 * 0.1, 0.81];
        for (k, w) in want.iter().enumerate() {
            assert!((s.get(k) - w).abs() < 1e-12);
        }
        assert!(s.probs()[3..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn degenerate_herald_is_an_error() {
        let p = params(0.0, 0.5, 0.5, 2);
        assert_eq!(heralded_diagonals(&p, 10), Err(Error::DegenerateHerald { m: 2 }));
        let p = params(0.4, 0.0, 0.5, 1);
        assert_eq!(heralded_diagonals(&p, 10), Err(Error::DegenerateHerald { m: 1 }));
        // m = 0 with a blind detector is fine: the signal is the lossy thermal
        // marginal, ⟨0|ρ|0⟩ = (1 − λ²)/(1 − λ²(1 − ζ₂)).
        let s = heralded_diagonals(&p.with_m(0), 60).unwrap();
        assert!((s.get(0) - 0.6 / 0.8).abs() < 1e-12);
    }

    #[test]
    fn cutoff_must_cover_m() {
        let p = params(0.4, 0.9, 0.9, 4);
        assert!(matches!(heralded_diagonals(&p, 4), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn normalization_with_tail() {
        let p = params(0.6, 0.6, 0.7, 5);
        let s = heralded_diagonals(&p, 12).unwrap();
        assert!(s.tail_mass() > 0.0);
        let total: f64 = s.probs().iter().sum::<f64>() + s.tail_mass();
        assert!((total - 1.0).abs() < 1e-9);
        let wide = heralded_diagonals(&p, 200).unwrap();
        let wide_total: f64 = wide.probs().iter().sum();
        assert!((wide_total - 1.0).abs() < 1e-10);
    }
}

#[cfg(test)]
mod proptests {
    use super::*;
    use crate::params::SqueezeParam;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn h_is_symmetric(k in 0u32..=30, m in 0u32..=30, xi in 1u32..=9) {
            let x = xi as f64 / 10.0;
            let a = series_h(k, m, x).unwrap();
            let b = series_h(m, k, x).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
        }

        #[test]
        fn diagonals_are_normalized(
            lambda2 in 0.01f64..0.7,
            zeta1 in 0.05f64..=1.0,
            zeta2 in 0.0f64..=1.0,
            m in 0u32..=6,
        ) {
            let p = ExperimentParams::new(SqueezeParam::from_lambda_squared(lambda2).unwrap(), zeta1, zeta2, m).unwrap();
            let s = heralded_diagonals(&p, 25).unwrap();
            prop_assert!(s.probs().iter().all(|&v| v >= 0.0));
            let total: f64 = s.probs().iter().sum::<f64>() + s.tail_mass();
            prop_assert!((total - 1.0).abs() < 1e-9);
        }
    }
}
