//! Special functions used by the distribution kernels and the asymptotic
//! variance formulas.
//!
//! Gamma, digamma and the complementary error function come from `statrs`
//! (Lanczos approximation with `g = 10.9`, relative error near machine
//! precision on the ranges used here). The small-shape expansions below are
//! needed because several GEV formulas divide by powers of the shape and lose
//! all precision near zero if evaluated in closed form.

use std::sync::OnceLock;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Shapes with `|gamma|` below this use the analytic `gamma -> 0` limit.
pub const SHAPE_ZERO_TOL: f64 = 1e-8;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// Γ'(x) = Γ(x)·ψ(x).
pub fn gamma_prime(x: f64) -> f64 {
    gamma(x) * digamma(x)
}

pub fn erfc(x: f64) -> f64 {
    statrs::function::erf::erfc(x)
}

/// `P(N(0,1) > z)`, accurate far into the upper tail.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * erfc(z / std::f64::consts::SQRT_2)
}

/// Standard normal quantile.
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}

// ζ(2), ζ(3), ..., ζ(20).
const ZETA: [f64; 19] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_369_9,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308_0,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307_0,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265_0,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
];

fn zeta(k: usize) -> f64 {
    if k <= 20 {
        ZETA[k - 2]
    } else {
        (1..=8).map(|n| (n as f64).powi(-(k as i32))).sum()
    }
}

const TAYLOR_TERMS: usize = 32;

/// Taylor coefficients `a_j` of `Γ(1 - g) = Σ a_j g^j`, obtained by
/// exponentiating `ln Γ(1 - g) = γ_E g + Σ_{k≥2} ζ(k) g^k / k`.
fn gamma_one_minus_coefficients() -> &'static [f64; TAYLOR_TERMS] {
    static COEFFS: OnceLock<[f64; TAYLOR_TERMS]> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let mut log_coeffs = [0.0; TAYLOR_TERMS];
        log_coeffs[1] = EULER_GAMMA;
        for (k, c) in log_coeffs.iter_mut().enumerate().skip(2) {
            *c = zeta(k) / k as f64;
        }
        let mut a = [0.0; TAYLOR_TERMS];
        a[0] = 1.0;
        for n in 1..TAYLOR_TERMS {
            let s: f64 = (1..=n).map(|k| k as f64 * log_coeffs[k] * a[n - k]).sum();
            a[n] = s / n as f64;
        }
        a
    })
}

/// Radius below which [`g_three`] and [`g_three_prime`] use the series.
const SERIES_RADIUS: f64 = 0.1;

/// `(1 - Γ(1 - g)) / g`, with value `-γ_E` at zero.
pub fn g_three(g: f64) -> f64 {
    if g.abs() < SERIES_RADIUS {
        let a = gamma_one_minus_coefficients();
        -a[1..]
            .iter()
            .rev()
            .fold(0.0, |acc, &c| acc * g + c)
    } else {
        (1.0 - gamma(1.0 - g)) / g
    }
}

/// Derivative of [`g_three`]: `(g Γ'(1-g) - 1 + Γ(1-g)) / g²`.
pub fn g_three_prime(g: f64) -> f64 {
    if g.abs() < SERIES_RADIUS {
        let a = gamma_one_minus_coefficients();
        // d/dg of -Σ_{j≥1} a_j g^{j-1} = -Σ_{j≥2} (j-1) a_j g^{j-2}
        -(2..TAYLOR_TERMS)
            .rev()
            .fold(0.0, |acc, j| acc * g + (j - 1) as f64 * a[j])
    } else {
        let gm = gamma(1.0 - g);
        (g * gamma_prime(1.0 - g) - 1.0 + gm) / (g * g)
    }
}

/// `expm1(z) / z` and its derivative in `z`, both without cancellation.
pub(crate) fn expm1_ratio(z: f64) -> (f64, f64) {
    if z.abs() < 1.0 {
        // Σ z^j/(j+1)!  and  Σ j z^{j-1}/(j+1)!
        let mut value = 1.0;
        let mut deriv = 0.0;
        let mut coef = 1.0; // 1/(j+1)!
        let mut zpow = 1.0; // z^{j-1}
        for j in 1..30 {
            coef /= (j + 1) as f64;
            deriv += j as f64 * coef * zpow;
            zpow *= z;
            value += coef * zpow;
        }
        (value, deriv)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (z * e - e + 1.0) / (z * z))
    }
}

/// `(a^g - 1)/g` and its derivative in `g`, continuous through `g = 0`.
pub(crate) fn power_ratio(base: f64, g: f64) -> (f64, f64) {
    let l = base.ln();
    let (v, d) = expm1_ratio(g * l);
    (l * v, l * l * d)
}
