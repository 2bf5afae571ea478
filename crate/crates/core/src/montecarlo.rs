//! Finite-sample emulation of an experimental campaign.
//!
//! Each run draws `⌊repetitions · P⌋` heralded shots from the model state as
//! one multinomial histogram over `sample_cutoff` photon-number bins plus an
//! overflow bin, and reduces it to the witness pair `(x_m, y_m)`. The
//! ensemble of runs gives the means and sample standard deviations used by
//! certification.
//!
//! Run `r` draws from a ChaCha8 generator keyed by the campaign seed on
//! stream `r`, so results do not depend on the order runs are evaluated in.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Binomial;

use crate::detector::{DetectorModel, FreshTables, WeightSource};
use crate::error::{Error, Result};
use crate::fock::DiagonalState;
use crate::params::ExperimentParams;
use crate::MIN_SAMPLES_PER_RUN;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CampaignConfig {
    /// Experimental shot budget per run.
    pub repetitions: u64,
    /// Number of independent runs in the ensemble.
    pub runs: u32,
    /// Number of photon-number bins; an overflow bin is always added.
    pub sample_cutoff: usize,
    pub seed: u64,
}

impl CampaignConfig {
    /// 10⁸ shots, 1000 runs, 20 bins.
    pub const fn paper(seed: u64) -> Self {
        Self {
            repetitions: 100_000_000,
            runs: 1000,
            sample_cutoff: 20,
            seed,
        }
    }

    /// 10⁶ shots, 100 runs, 20 bins.
    pub const fn fast(seed: u64) -> Self {
        Self {
            repetitions: 1_000_000,
            runs: 100,
            sample_cutoff: 20,
            seed,
        }
    }

    pub fn validate(&self, m: u32) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1"));
        }
        if self.runs < 2 {
            return Err(Error::InvalidConfig("an ensemble needs at least 2 runs"));
        }
        if self.sample_cutoff < m as usize + 2 {
            return Err(Error::InvalidConfig("sample cutoff must be at least m + 2"));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }
}

/// Photon-number counts of one run; the last bin collects every count at or
/// above the sampling cutoff.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
}

impl Histogram {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn overflow(&self) -> u64 {
        self.counts.last().copied().unwrap_or(0)
    }

    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub m: u32,
    pub mean_x: f64,
    pub mean_y: f64,
    pub sd_x: f64,
    pub sd_y: f64,
    pub n_samples: u64,
    pub runs: u32,
    /// Ensemble-mean frequency of every bin, overflow last.
    pub mean_frequencies: Vec<f64>,
}

/// `⌊repetitions · P⌋` for the configured detector.
pub fn per_run_samples(p: &ExperimentParams, det: &DetectorModel, cfg: &CampaignConfig) -> Result<u64> {
    per_run_samples_with(p, det, cfg, &FreshTables)
}

pub fn per_run_samples_with(
    p: &ExperimentParams,
    det: &DetectorModel,
    cfg: &CampaignConfig,
    tables: &dyn WeightSource,
) -> Result<u64> {
    let probability = det.success_probability_with(p, tables)?;
    samples_for_probability(probability, cfg.repetitions)
}

/// `⌊repetitions · probability⌋`, rejected below [`MIN_SAMPLES_PER_RUN`].
pub fn samples_for_probability(probability: f64, repetitions: u64) -> Result<u64> {
    let samples = (repetitions as f64 * probability).floor() as u64;
    if samples < MIN_SAMPLES_PER_RUN {
        return Err(Error::InsufficientSamples {
            samples,
            floor: MIN_SAMPLES_PER_RUN,
        });
    }
    Ok(samples)
}

/// One multinomial histogram over `(probs…, tail_mass)`, drawn bin by bin
/// as a chain of conditional binomials.
pub fn draw_run<R: Rng + ?Sized>(state: &DiagonalState, n_samples: u64, rng: &mut R) -> Histogram {
    let probs = state.probs();
    let mut counts = vec![0u64; probs.len() + 1];
    let mut remaining = n_samples;
    // Mass not yet assigned, recomputed from the remaining bins so the
    // conditional probabilities do not drift.
    let mut suffix = vec![0.0; probs.len() + 1];
    suffix[probs.len()] = state.tail_mass();
    for k in (0..probs.len()).rev() {
        suffix[k] = suffix[k + 1] + probs[k];
    }
    for (k, &pk) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let q = if suffix[k] > 0.0 {
            (pk / suffix[k]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let drawn = if q == 0.0 {
            0
        } else if q == 1.0 {
            remaining
        } else {
            // q is in (0, 1), so construction cannot fail.
            rng.sample(Binomial::new(remaining, q).expect("binomial parameters in range"))
        };
        counts[k] = drawn;
        remaining -= drawn;
    }
    counts[probs.len()] += remaining;
    Histogram { counts }
}

/// `x_m = 1 − Σ_{k ≤ m} p̄_k` (overflow included) and `y_m = p̄_m`.
pub fn witness_pair(hist: &Histogram, m: u32) -> (f64, f64) {
    let n = hist.total();
    if n == 0 {
        return (0.0, 0.0);
    }
    let m = m as usize;
    let at_most_m: u64 = hist.counts.iter().take(m + 1).sum();
    let nf = n as f64;
    let x = 1.0 - at_most_m as f64 / nf;
    let y = hist.counts.get(m).copied().unwrap_or(0) as f64 / nf;
    (x, y)
}

fn run_rng(seed: u64, run: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Ensemble statistics for a known state and per-run sample count.
pub fn simulate_state(state: &DiagonalState, m: u32, n_samples: u64, cfg: &CampaignConfig) -> Result<EnsembleStats> {
    cfg.validate(m)?;
    if n_samples == 0 {
        return Err(Error::InsufficientSamples {
            samples: 0,
            floor: MIN_SAMPLES_PER_RUN,
        });
    }
    if state.cutoff() != cfg.sample_cutoff {
        return Err(Error::InvalidConfig("state cutoff differs from the sampling cutoff"));
    }
    let bins = state.cutoff() + 1;
    let mut xs = Vec::with_capacity(cfg.runs as usize);
    let mut ys = Vec::with_capacity(cfg.runs as usize);
    let mut freq_sums = vec![0.0; bins];
    for run in 0..cfg.runs {
        let hist = draw_run(state, n_samples, &mut run_rng(cfg.seed, run));
        let (x, y) = witness_pair(&hist, m);
        xs.push(x);
        ys.push(y);
        for (acc, f) in freq_sums.iter_mut().zip(hist.frequencies()) {
            *acc += f;
        }
    }
    let (mean_x, sd_x) = mean_and_sd(&xs);
    let (mean_y, sd_y) = mean_and_sd(&ys);
    let runs = cfg.runs as f64;
    Ok(EnsembleStats {
        m,
        mean_x,
        mean_y,
        sd_x,
        sd_y,
        n_samples,
        runs: cfg.runs,
        mean_frequencies: freq_sums.into_iter().map(|s| s / runs).collect(),
    })
}

pub fn simulate_ensemble(p: &ExperimentParams, det: &DetectorModel, cfg: &CampaignConfig) -> Result<EnsembleStats> {
    simulate_ensemble_with(p, det, cfg, &FreshTables)
}

pub fn simulate_ensemble_with(
    p: &ExperimentParams,
    det: &DetectorModel,
    cfg: &CampaignConfig,
    tables: &dyn WeightSource,
) -> Result<EnsembleStats> {
    cfg.validate(p.m)?;
    let n_samples = per_run_samples_with(p, det, cfg, tables)?;
    let state = det.heralded_diagonals_with(p, cfg.sample_cutoff, tables)?;
    simulate_state(&state, p.m, n_samples, cfg)
}

/// Mean and sample standard deviation (`n − 1` denominator).
fn mean_and_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent seed from a base seed and a list of coordinates.
pub fn derive_seed(seed: u64, coords: &[u64]) -> u64 {
    coords
        .iter()
        .fold(mix64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15)), |acc, &c| {
            mix64(acc ^ mix64(c.wrapping_add(0x9E37_79B9_7F4A_7C15)))
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SqueezeParam;

    fn binomial_state() -> DiagonalState {
        let mut probs = vec![0.0; 20];
        probs[..3].copy_from_slice(&[0.25, 0.5, 0.25]);
        DiagonalState::from_probs(probs).unwrap()
    }

    #[test]
    fn sample_counts() {
        assert_eq!(samples_for_probability(1.0, 100_000_000), Ok(100_000_000));
        assert_eq!(samples_for_probability(1e-5, 100_000_000), Ok(1000));
        assert_eq!(samples_for_probability(2.34e-4, 100_000_000), Ok(23_400));
        assert_eq!(
            samples_for_probability(0.99e-5, 100_000_000),
            Err(Error::InsufficientSamples {
                samples: 990,
                floor: 1000
            })
        );
    }

    #[test]
    fn deterministic_state_histogram() {
        let state = DiagonalState::fock(4, 20).unwrap();
        let hist = draw_run(&state, 12_345, &mut run_rng(1, 0));
        assert_eq!(hist.counts()[4], 12_345);
        assert_eq!(hist.total(), 12_345);
    }

    #[test]
    fn histogram_frequencies_match_probabilities() {
        let n = 1_000_000u64;
        let hist = draw_run(&binomial_state(), n, &mut run_rng(7, 3));
        assert_eq!(hist.total(), n);
        for (k, p) in [0.25, 0.5, 0.25].into_iter().enumerate() {
            let f = hist.counts()[k] as f64 / n as f64;
            let sigma = (p * (1.0 - p) / n as f64).sqrt();
            assert!((f - p).abs() < 5.0 * sigma, "bin {k}: {f}");
        }
    }

    #[test]
    fn same_seed_same_histogram() {
        let a = draw_run(&binomial_state(), 50_000, &mut run_rng(99, 5));
        let b = draw_run(&binomial_state(), 50_000, &mut run_rng(99, 5));
        let c = draw_run(&binomial_state(), 50_000, &mut run_rng(99, 6));
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn overflow_bin_carries_tail() {
        let mut probs = vec![0.0; 5];
        probs[0] = 0.5;
        let state = DiagonalState::from_probs(probs).unwrap();
        let hist = draw_run(&state, 100_000, &mut run_rng(3, 0));
        assert_eq!(hist.counts().len(), 6);
        assert!(hist.overflow() > 45_000 && hist.overflow() < 55_000);
        let (x, _) = witness_pair(&hist, 2);
        let freqs = hist.frequencies();
        assert!((x - (1.0 - freqs[..3].iter().sum::<f64>())).abs() < 1e-15);
    }

    #[test]
    fn witness_examples() {
        let n = 1000;
        let mut c = vec![0; 21];
        c[4] = n;
        assert_eq!(witness_pair(&Histogram::from_counts(c.clone()), 4), (0.0, 1.0));
        c[4] = 0;
        c[0] = n;
        assert_eq!(witness_pair(&Histogram::from_counts(c.clone()), 4), (0.0, 0.0));
        c[0] = 0;
        c[3] = n / 2;
        c[5] = n / 2;
        assert_eq!(witness_pair(&Histogram::from_counts(c), 4), (0.5, 0.0));
    }

    #[test]
    fn ideal_fock_ensemble() {
        let s = SqueezeParam::from_lambda_squared(0.5).unwrap();
        let p = ExperimentParams::new(s, 1.0, 1.0, 4).unwrap();
        let stats = simulate_ensemble(&p, &DetectorModel::Pnr, &CampaignConfig::fast(11)).unwrap();
        assert_eq!(
            (stats.mean_x, stats.mean_y, stats.sd_x, stats.sd_y),
            (0.0, 1.0, 0.0, 0.0)
        );
        // (1 − λ²) λ⁸ · 10⁶
        assert_eq!(stats.n_samples, 31_250);
    }

    #[test]
    fn config_validation() {
        assert!(CampaignConfig {
            runs: 1,
            ..CampaignConfig::fast(0)
        }
        .validate(3)
        .is_err());
        assert!(CampaignConfig {
            repetitions: 0,
            ..CampaignConfig::fast(0)
        }
        .validate(3)
        .is_err());
        assert!(CampaignConfig {
            sample_cutoff: 4,
            ..CampaignConfig::fast(0)
        }
        .validate(3)
        .is_err());
        assert!(CampaignConfig {
            sample_cutoff: 5,
            ..CampaignConfig::fast(0)
        }
        .validate(3)
        .is_ok());
    }

    #[test]
    fn insufficient_samples_propagate() {
        let s = SqueezeParam::from_lambda_squared(0.01).unwrap();
        let p = ExperimentParams::new(s, 0.5, 0.9, 5).unwrap();
        assert!(matches!(
            simulate_ensemble(&p, &DetectorModel::Pnr, &CampaignConfig::paper(0)),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn seed_derivation_spreads() {
        let a = derive_seed(1, &[0, 1]);
        let b = derive_seed(1, &[1, 0]);
        let c = derive_seed(2, &[0, 1]);
        assert!(a != b && a != c && b != c);
        assert_eq!(a, derive_seed(1, &[0, 1]));
    }
}
