#[allow(unused_imports)]
use num_traits::Float;

/// Largest `n` for which every `C(n, k)` fits in a `u128` via the
/// multiplicative recurrence below.
const EXACT_BINOMIAL_MAX_N: u64 = 50;

fn exact_binomial(n: u64, k: u64) -> u128 {
    let k = k.min(n - k) as u128;
    let mut acc: u128 = 1;
    for j in 1..=k {
        // Each partial product is itself a binomial coefficient, so the
        // division is exact.
        acc = acc * (n as u128 - k + j) / j;
    }
    acc
}

/// `C(n, k)` as `f64`.
///
/// Exact integer arithmetic up to `n = 50`, log space above.
#[cfg(test)]
pub(crate) fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        0.0
    } else if n <= EXACT_BINOMIAL_MAX_N {
        exact_binomial(n, k) as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// `ln C(n, k)`, with the same exact/log-space split as [`binomial`].
pub(crate) fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if n <= EXACT_BINOMIAL_MAX_N {
        return (exact_binomial(n, k) as f64).ln();
    }
    let k = k.min(n - k);
    (1..=k).map(|j| ((n - k + j) as f64 / j as f64).ln()).sum()
}

/// `exponent * ln(base)` with the convention `0^0 = 1`.
///
/// Returns `None` when the power is exactly zero (`base = 0`, `exponent > 0`).
pub(crate) fn ln_pow(base: f64, exponent: u64) -> Option<f64> {
    if exponent == 0 {
        Some(0.0)
    } else if base == 0.0 {
        None
    } else {
        Some(exponent as f64 * base.ln())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials_are_exact() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(0, 0), 1.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(50, 25), 126_410_606_437_752.0);
    }

    #[test]
    fn log_space_matches_exact_at_the_seam() {
        for k in 0..=51 {
            let exact = exact_binomial(51, k) as f64;
            let via_log = ln_binomial(51, k).exp();
            assert!((exact - via_log).abs() <= 1e-12 * exact, "k = {k}");
        }
        let big = binomial(60, 30);
        assert!((big / 118_264_581_564_861_424.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ln_pow_zero_conventions() {
        assert_eq!(ln_pow(0.0, 0), Some(0.0));
        assert_eq!(ln_pow(0.0, 3), None);
        assert!((ln_pow(0.5, 2).unwrap() - 0.25f64.ln()).abs() < 1e-15);
    }
}
