use heraldsim_core::fock::{heralded_diagonals, success_probability};
use heraldsim_core::oracle::oracle_heralded;
use heraldsim_core::{ExperimentParams, SqueezeParam};

fn params(lambda2: f64, zeta1: f64, zeta2: f64, m: u32) -> ExperimentParams {
    ExperimentParams::new(SqueezeParam::from_lambda_squared(lambda2).unwrap(), zeta1, zeta2, m).unwrap()
}

#[test]
fn closed_form_matches_kraus_oracle() {
    let mut worst_diag: f64 = 0.0;
    let mut worst_prob: f64 = 0.0;
    for &lambda2 in &[0.1, 0.3, 0.5] {
        for &zeta1 in &[0.6, 0.8, 1.0] {
            for &zeta2 in &[0.6, 0.8, 1.0] {
                for m in 0..=5 {
                    let p = params(lambda2, zeta1, zeta2, m);
                    let (oracle_p, oracle_state) = oracle_heralded(&p, 60).unwrap();
                    let state = heralded_diagonals(&p, 25).unwrap();
                    worst_prob = worst_prob.max((success_probability(&p) - oracle_p).abs());
                    for k in 0..25 {
                        worst_diag = worst_diag.max((state.get(k) - oracle_state.get(k)).abs());
                    }
                }
            }
        }
    }
    assert!(worst_diag <= 1e-10, "diagonal deviation {worst_diag:e}");
    assert!(worst_prob <= 1e-12, "probability deviation {worst_prob:e}");
}

#[test]
fn herald_probability_example_both_routes() {
    let p = params(0.5, 0.8, 0.3, 1);
    let want = 20.0 / 81.0;
    assert!((success_probability(&p) - want).abs() < 1e-15);
    assert!((oracle_heralded(&p, 60).unwrap().0 - want).abs() < 1e-12);
}

#[test]
fn lossy_fock_binomial_law() {
    let binom = |n: u32, k: u32| (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64);
    for m in 0..=6 {
        for &zeta2 in &[0.5, 0.9, 0.9725] {
            for &lambda2 in &[0.05, 0.5, 0.9] {
                let s = heralded_diagonals(&params(lambda2, 1.0, zeta2, m), 20).unwrap();
                for k in 0..20u32 {
                    let want = if k <= m {
                        binom(m, k) * zeta2.powi(k as i32) * (1.0 - zeta2).powi((m - k) as i32)
                    } else {
                        0.0
                    };
                    assert!((s.get(k as usize) - want).abs() <= 1e-12, "m={m} k={k} zeta2={zeta2}");
                }
            }
        }
    }
}

#[test]
fn lossless_limit_is_exact() {
    for m in 0..=10 {
        for &lambda2 in &[1e-12, 0.01, 0.5, 0.99] {
            let s = heralded_diagonals(&params(lambda2, 1.0, 1.0, m), 30).unwrap();
            for k in 0..30 {
                assert_eq!(s.get(k), if k == m as usize { 1.0 } else { 0.0 });
            }
        }
    }
}

#[test]
fn herald_distribution_is_complete() {
    let p = params(0.5, 0.8, 1.0, 0);
    let partial: f64 = (0..=40).map(|m| success_probability(&p.with_m(m))).sum();
    assert!(partial > 1.0 - 1e-8);
}

#[test]
fn oracle_marginal_completeness() {
    let p = params(0.5, 0.8, 0.9, 0);
    let joint = heraldsim_core::oracle::JointNumberDistribution::build(&p, 40).unwrap();
    let herald_total: f64 = (0..40).map(|a| joint.herald_marginal(a)).sum();
    assert!((herald_total - (1.0 - joint.tail_deficit())).abs() <= 1e-12);
}
