//! Estimator correctness properties shared by the property tests and the
//! acceptance gate.

use blockmax::blocks;
use blockmax::gev::{self, GevParams};
use blockmax::pwm;
use blockmax::trend;
use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

pub fn params() -> impl Strategy<Value = (f64, f64, f64)> {
    (-3.0..3.0f64, 0.5..5.0f64, -0.9..0.9f64)
}

/// `phi(theoretical_pwm(θ)) = θ`.
pub fn phi_inverts_theoretical_pwm((mu, sigma, gamma): (f64, f64, f64)) -> Result<(), TestCaseError> {
    let theta = GevParams::new(mu, sigma, gamma).unwrap();
    let back = gev::phi(&gev::theoretical_pwm(&theta).unwrap()).unwrap();
    prop_assert!(close(back.mu, mu, 1e-8), "μ {} vs {mu}", back.mu);
    prop_assert!(close(back.sigma, sigma, 1e-8), "σ {} vs {sigma}", back.sigma);
    prop_assert!(close(back.gamma, gamma, 1e-8), "γ {} vs {gamma}", back.gamma);
    Ok(())
}

/// Distinct integers, so that the U-statistic is an exact integer sum.
pub fn tie_free_integers() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::hash_set(-10_000i64..10_000, 3..60)
        .prop_map(|set| set.into_iter().map(|v| v as f64).collect())
}

/// `β̂₁ = {m(m-1)}^{-1} Σ_{i≠j} M_i 1(M_j ≤ M_i)` on tie-free samples.
pub fn beta1_is_u_statistic(sample: Vec<f64>) -> Result<(), TestCaseError> {
    let m = sample.len();
    let mut sum: i128 = 0;
    for (i, &a) in sample.iter().enumerate() {
        for (j, &b) in sample.iter().enumerate() {
            if i != j && b <= a {
                sum += a as i128;
            }
        }
    }
    let u = sum as f64 / (m * (m - 1)) as f64;
    let beta = pwm::empirical_pwm(&sample).unwrap();
    prop_assert!(
        (beta.beta1 - u).abs() <= 1e-13 * (1.0 + u.abs()),
        "β̂₁ {} vs U-statistic {u}",
        beta.beta1
    );
    Ok(())
}

pub fn gev_samples() -> impl Strategy<Value = (Vec<f64>, f64, f64)> {
    (
        prop::collection::vec(0.001..0.999f64, 20..200),
        0.1..10.0f64,
        -50.0..50.0f64,
    )
        .prop_map(|(u, a, b)| {
            let theta = GevParams::standard(-0.2);
            (u.iter().map(|&p| theta.quantile(p).unwrap()).collect(), a, b)
        })
}

/// `fit(a M + b) = (a μ̂ + b, a σ̂, γ̂)`.
pub fn fit_is_location_scale_equivariant((sample, a, b): (Vec<f64>, f64, f64)) -> Result<(), TestCaseError> {
    let Ok(fit) = pwm::fit_pwm(&sample) else {
        return Ok(());
    };
    let moved: Vec<f64> = sample.iter().map(|x| a * x + b).collect();
    let g = pwm::fit_pwm(&moved).unwrap().params;
    let p = fit.params;
    prop_assert!(close(g.mu, a * p.mu + b, 1e-10), "μ {} vs {}", g.mu, a * p.mu + b);
    prop_assert!(close(g.sigma, a * p.sigma, 1e-10), "σ {} vs {}", g.sigma, a * p.sigma);
    prop_assert!((g.gamma - p.gamma).abs() <= 1e-10, "γ {} vs {}", g.gamma, p.gamma);
    Ok(())
}

pub fn series_and_block() -> impl Strategy<Value = (Vec<f64>, usize)> {
    (prop::collection::vec(-100.0..100.0f64, 1..300), 1usize..40)
        .prop_filter("block fits the series", |(x, r)| *r <= x.len())
}

/// The monotone-deque window maxima equal brute-force recomputation.
pub fn sliding_matches_naive((series, r): (Vec<f64>, usize)) -> Result<(), TestCaseError> {
    let naive: Vec<f64> = series
        .windows(r)
        .map(|w| w.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .collect();
    prop_assert_eq!(blocks::sliding_maxima(&series, r).unwrap().values, naive);
    Ok(())
}

/// `β̃₀` equals the plain sliding `β̂₀` bit for bit.
pub fn bias_reduced_beta0_is_plain((series, r): (Vec<f64>, usize)) -> Result<(), TestCaseError> {
    let plain = pwm::empirical_pwm(&blocks::sliding_maxima(&series, r).unwrap().values);
    let reduced = pwm::bias_reduced_sliding_pwm(&series, r);
    if let (Ok(p), Ok(t)) = (plain, reduced) {
        prop_assert_eq!(p.beta0.to_bits(), t.beta0.to_bits());
    }
    Ok(())
}

/// Series `[1, 2, 3, 4]`, `r = 2`: sliding maxima `[2, 3, 4]`, only the
/// pairs of windows 1 and 3 are separated, `β̃₁ = (2·0 + 4·1)/2 = 2`.
pub fn bias_reduced_beta1_hand_example() -> bool {
    pwm::bias_reduced_beta1(&[1.0, 2.0, 3.0, 4.0], 2).unwrap() == 2.0
}

pub fn tilde_inputs() -> impl Strategy<Value = (f64, f64, f64, f64, f64, usize)> {
    (
        -10.0..40.0f64,
        0.2..5.0f64,
        -0.45..0.45f64,
        -5.0..5.0f64,
        -2.0..2.0f64,
        1usize..400,
    )
}

/// The maximum of `r` i.i.d. draws from the tilde law is
/// `GEV(b̂ + ĉ x_t, â, γ̂)`: `G̃(x)^r = G(x)` on a quantile grid.
pub fn tilde_max_stability((b, a, g, c, x, r): (f64, f64, f64, f64, f64, usize)) -> Result<(), TestCaseError> {
    let theta = GevParams::new(b, a, g).unwrap();
    let tilde = trend::bootstrap_tilde_params(&theta, c, x, r);
    let target = GevParams::new(b + c * x, a, g).unwrap();
    for p in [0.001, 0.05, 0.3, 0.5, 0.8, 0.99, 0.9999] {
        let at = target.quantile(p).unwrap();
        let lhs = gev::gev_cdf(&tilde, at).powi(r as i32);
        prop_assert!((lhs - p).abs() <= 1e-12, "p={p}: {lhs}");
    }
    Ok(())
}
