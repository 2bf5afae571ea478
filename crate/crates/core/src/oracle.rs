//! Brute-force reference model.
//!
//! Builds the truncated joint photon-number distribution of the two-mode
//! squeezed vacuum, pushes each mode through its loss channel by applying
//! the Kraus operators `M_k(ζ) = √((1 − ζ)^k / k!) √ζ^n̂ â^k` literally, and
//! conditions on the herald count. Nothing here calls into [`crate::fock`]
//! or [`crate::detector`]; the module exists only to cross-check them.
//!
//! Only the diagonal sector is needed: the reduced joint state of the source
//! is `Σ_i (1 − λ²) λ^{2i} |i, i⟩⟨i, i|` after tracing the phase, loss maps
//! number-diagonal operators to number-diagonal operators, and both
//! detectors are diagonal, so `i ≠ j` coherences never reach a measured
//! diagonal element.

use alloc::vec;
use alloc::vec::Vec;

use num_bigint::BigInt;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::fock::DiagonalState;
use crate::params::ExperimentParams;

pub const DEFAULT_TRUNCATION: usize = 40;

/// Largest truncation deficit the oracle accepts.
pub const MAX_DEFICIT: f64 = 1e-10;

/// `|⟨i − k| M_k(ζ) |i⟩|²`.
///
/// The amplitude is `√((1 − ζ)^k / k!) · √(i!/(i − k)!) · √ζ^{i−k}`; its
/// square is formed directly, with the factorial ratio
/// `i! / (k! (i − k)!)` built as an exact integer and the powers carried in
/// double-double so each element is correct to about one ulp.
fn kraus_element_squared(i: usize, k: usize, zeta: f64) -> f64 {
    if k > i {
        return 0.0;
    }
    // i!/(i − k)! / k!, accumulated so every intermediate is an integer
    let mut ratio: u128 = 1;
    for j in 1..=k as u128 {
        ratio = ratio * (i as u128 - k as u128 + j) / j;
    }
    let hi = ratio as f64;
    let lo = (ratio as i128 - hi as i128) as f64;
    let value = dd_mul(dd_mul((hi, lo), dd_powi(1.0 - zeta, k)), dd_powi(zeta, i - k));
    value.0 + value.1
}

type DoubleDouble = (f64, f64);

fn two_prod(a: f64, b: f64) -> DoubleDouble {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

fn dd_mul(a: DoubleDouble, b: DoubleDouble) -> DoubleDouble {
    let (p, e) = two_prod(a.0, b.0);
    let e = e + (a.0 * b.1 + a.1 * b.0);
    let s = p + e;
    (s, e - (s - p))
}

fn dd_powi(x: f64, mut n: usize) -> DoubleDouble {
    let mut result = (1.0, 0.0);
    let mut base = (x, 0.0);
    while n > 0 {
        if n & 1 == 1 {
            result = dd_mul(result, base);
        }
        base = dd_mul(base, base);
        n >>= 1;
    }
    result
}

/// Output photon-number distribution of `|i⟩⟨i|` after the loss channel:
/// `out[j] = ⟨j| Σ_k M_k |i⟩⟨i| M_k† |j⟩`.
pub fn loss_kernel(i: usize, zeta: f64) -> Vec<f64> {
    let mut out = vec![0.0; i + 1];
    for k in 0..=i {
        out[i - k] += kraus_element_squared(i, k, zeta);
    }
    out
}

/// Joint photon-number distribution `P(a, b)` of herald count `a` and signal
/// count `b` after both loss channels, truncated at `truncation` source
/// photons.
#[derive(Debug, Clone, PartialEq)]
pub struct JointNumberDistribution {
    p: Vec<f64>,
    truncation: usize,
    tail_deficit: f64,
}

impl JointNumberDistribution {
    pub fn build(params: &ExperimentParams, truncation: usize) -> Result<Self> {
        params.validate()?;
        if truncation == 0 {
            return Err(Error::InvalidConfig("oracle truncation must be positive"));
        }
        let lambda2 = params.lambda_squared();
        let k = truncation;
        let mut p = vec![0.0; k * k];
        let mut weight = 1.0 - lambda2;
        let mut captured = 0.0;
        for i in 0..k {
            let herald = loss_kernel(i, params.zeta1);
            let signal = loss_kernel(i, params.zeta2);
            for (a, ha) in herald.iter().enumerate() {
                for (b, sb) in signal.iter().enumerate() {
                    p[a * k + b] += weight * ha * sb;
                }
            }
            captured += weight;
            weight *= lambda2;
        }
        // Σ_{i ≥ K} (1 − λ²) λ^{2i} = λ^{2K}
        let tail_deficit = lambda2.powi(k as i32).max(1.0 - captured).max(0.0);
        Ok(Self {
            p,
            truncation: k,
            tail_deficit,
        })
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn tail_deficit(&self) -> f64 {
        self.tail_deficit
    }

    pub fn get(&self, a: usize, b: usize) -> f64 {
        if a < self.truncation && b < self.truncation {
            self.p[a * self.truncation + b]
        } else {
            0.0
        }
    }

    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }

    /// Herald marginal `Σ_b P(a, b)`.
    pub fn herald_marginal(&self, a: usize) -> f64 {
        (0..self.truncation).map(|b| self.get(a, b)).sum()
    }

    fn check_deficit(&self) -> Result<()> {
        if self.tail_deficit > MAX_DEFICIT {
            return Err(Error::TruncationInsufficient {
                cutoff: self.truncation,
                deficit: self.tail_deficit,
            });
        }
        Ok(())
    }

    /// Condition the signal on herald weights `h(a)` (a projector for PNR,
    /// click probabilities for a cascade).
    fn condition(&self, herald_weight: impl Fn(usize) -> f64, m: u32) -> Result<(f64, DiagonalState)> {
        self.check_deficit()?;
        let k = self.truncation;
        let mut signal = vec![0.0; k];
        for a in 0..k {
            let h = herald_weight(a);
            if h == 0.0 {
                continue;
            }
            for (b, s) in signal.iter_mut().enumerate() {
                *s += h * self.get(a, b);
            }
        }
        let probability: f64 = signal.iter().sum();
        if probability == 0.0 {
            return Err(Error::DegenerateHerald { m });
        }
        for s in &mut signal {
            *s /= probability;
        }
        Ok((probability, DiagonalState::from_probs(signal)?))
    }
}

/// Herald probability and normalized signal diagonals for an ideal PNR
/// herald on `params.m` photons.
pub fn oracle_heralded(params: &ExperimentParams, truncation: usize) -> Result<(f64, DiagonalState)> {
    if truncation <= params.m as usize {
        return Err(Error::InvalidConfig("oracle truncation must exceed m"));
    }
    let joint = JointNumberDistribution::build(params, truncation)?;
    let m = params.m as usize;
    joint.condition(|a| if a == m { 1.0 } else { 0.0 }, params.m)
}

/// Click probability `w(i, m, n)` from the inclusion–exclusion sum, in
/// exact integer arithmetic:
/// `w = C(n, m) Σ_j (−1)^j C(m, j) (m − j)^i / n^i`.
pub fn exact_cap_weight(i: u32, m: u32, n: u32) -> f64 {
    if m > n || i < m {
        return 0.0;
    }
    let binom = |a: u32, b: u32| -> BigInt {
        let mut acc = BigInt::one();
        for j in 1..=b {
            acc = acc * BigInt::from(a - b + j) / BigInt::from(j);
        }
        acc
    };
    let mut sum = BigInt::zero();
    for j in 0..=m {
        let term = binom(m, j) * num_traits::pow(BigInt::from(m - j), i as usize);
        if j % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let numerator = binom(n, m) * sum;
    let denominator = num_traits::pow(BigInt::from(n), i as usize);
    ratio_to_f64(&numerator, &denominator)
}

fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    // Scale so the integer quotient carries 64 significant bits.
    let shift = 64 + den.bits() as i64 - num.bits() as i64;
    let q = if shift >= 0 {
        (num << shift as usize) / den
    } else {
        num / (den << (-shift) as usize)
    };
    q.to_f64().unwrap_or(f64::NAN) * 2f64.powi(-shift as i32)
}

/// Herald probability and signal diagonals for a CAP detector of `n`
/// diodes reporting `params.m` clicks, with click weights from
/// [`exact_cap_weight`].
pub fn oracle_cap_heralded(params: &ExperimentParams, n: u32, truncation: usize) -> Result<(f64, DiagonalState)> {
    if params.m > n {
        return Err(Error::ClickOutOfRange { m: params.m, n });
    }
    let joint = JointNumberDistribution::build(params, truncation)?;
    let weights: Vec<f64> = (0..truncation as u32)
        .map(|a| exact_cap_weight(a, params.m, n))
        .collect();
    joint.condition(|a| weights[a], params.m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SqueezeParam;

    fn params(lambda2: f64, zeta1: f64, zeta2: f64, m: u32) -> ExperimentParams {
        ExperimentParams::new(SqueezeParam::from_lambda_squared(lambda2).unwrap(), zeta1, zeta2, m).unwrap()
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(loss_kernel(0, 0.3), vec![1.0]);
        assert_eq!(loss_kernel(2, 1.0), vec![0.0, 0.0, 1.0]);
        let half = loss_kernel(2, 0.5);
        for (got, want) in half.iter().zip([0.25, 0.5, 0.25]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    fn neumaier_sum(values: &[f64]) -> f64 {
        let (mut sum, mut comp) = (0.0f64, 0.0f64);
        for &v in values {
            let t = sum + v;
            comp += if sum.abs() >= v.abs() {
                (sum - t) + v
            } else {
                (v - t) + sum
            };
            sum = t;
        }
        sum + comp
    }

    #[test]
    fn kernel_rows_are_normalized() {
        // For ζ ≥ 1/2 the complement 1 − ζ is exact in binary.
        for i in 0..=60 {
            for &zeta in &[0.0, 0.5, 0.75, 0.9, 0.9725, 1.0] {
                let s = neumaier_sum(&loss_kernel(i, zeta));
                assert!((s - 1.0).abs() <= 1e-15, "i = {i}, zeta = {zeta}: {s}");
            }
        }
    }

    #[test]
    fn kernel_rows_with_inexact_complement() {
        // fl(1 − ζ) carries a relative error δ ~ 3e-17 for ζ = 0.1, so the row
        // sums to (1 + δ)^i before any evaluation error.
        for i in 0..=60 {
            for &zeta in &[0.1, 0.3] {
                let s = neumaier_sum(&loss_kernel(i, zeta));
                assert!((s - 1.0).abs() <= 1e-14, "i = {i}, zeta = {zeta}: {s}");
            }
        }
    }

    #[test]
    fn loss_channels_compose() {
        let (za, zb) = (0.7, 0.85);
        for i in 0..=30 {
            let mut composed = vec![0.0; i + 1];
            for (j, pj) in loss_kernel(i, za).iter().enumerate() {
                for (l, pl) in loss_kernel(j, zb).iter().enumerate() {
                    composed[l] += pj * pl;
                }
            }
            for (got, want) in composed.iter().zip(loss_kernel(i, za * zb)) {
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lossless_projection() {
        let p = params(0.4, 1.0, 1.0, 2);
        let (prob, state) = oracle_heralded(&p, 40).unwrap();
        assert!((prob - 0.6 * 0.16).abs() < 1e-15);
        assert_eq!(state.get(2), 1.0);
        assert_eq!(state.probs().iter().sum::<f64>(), 1.0);
    }

    #[test]
    fn vacuum_source() {
        let p = params(0.0, 0.5, 0.5, 0);
        let (prob, state) = oracle_heralded(&p, 20).unwrap();
        assert_eq!(prob, 1.0);
        assert_eq!(state.get(0), 1.0);
    }

    #[test]
    fn herald_probability_example() {
        let p = params(0.5, 0.8, 1.0, 1);
        let (prob, _) = oracle_heralded(&p, 60).unwrap();
        assert!((prob - 20.0 / 81.0).abs() < 1e-12);
    }

    #[test]
    fn marginals_account_for_deficit() {
        let p = params(0.5, 0.8, 0.9, 0);
        let joint = JointNumberDistribution::build(&p, 40).unwrap();
        let total: f64 = (0..40).map(|a| joint.herald_marginal(a)).sum();
        assert!((total - (1.0 - joint.tail_deficit())).abs() < 1e-12);
    }

    #[test]
    fn starved_truncation_is_reported() {
        let p = params(0.6, 0.9, 0.9, 1);
        assert!(matches!(
            oracle_heralded(&p, 5),
            Err(Error::TruncationInsufficient { cutoff: 5, .. })
        ));
    }

    #[test]
    fn exact_weights_small_cases() {
        assert_eq!(exact_cap_weight(0, 0, 5), 1.0);
        assert_eq!(exact_cap_weight(2, 2, 2), 0.5);
        assert!((exact_cap_weight(3, 2, 5) - 0.48).abs() < 1e-16);
        assert_eq!(exact_cap_weight(1, 2, 5), 0.0);
    }
}
