//! GEV, GPD and bivariate extreme value kernels, theoretical probability
//! weighted moments, and the map from PWMs back to GEV parameters.

use rand::distr::Open01;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{self, power_ratio, EULER_GAMMA, SHAPE_ZERO_TOL};

/// Location, scale and shape of a GEV law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub mu: f64,
    pub sigma: f64,
    pub gamma: f64,
}

impl GevParams {
    pub fn new(mu: f64, sigma: f64, gamma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain {
                name: "sigma",
                value: sigma,
                reason: "scale must be positive and finite",
            });
        }
        if !mu.is_finite() || !gamma.is_finite() {
            return Err(Error::parameter("GevParams", "location and shape must be finite"));
        }
        Ok(GevParams { mu, sigma, gamma })
    }

    /// The standard law `G_γ = G_(0,1,γ)`.
    pub fn standard(gamma: f64) -> Self {
        GevParams {
            mu: 0.0,
            sigma: 1.0,
            gamma,
        }
    }

    /// Law of `a·M + b` for `M` following `self`, `a > 0`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        GevParams {
            mu: a * self.mu + b,
            sigma: a * self.sigma,
            gamma: self.gamma,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        gev_cdf(self, x)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        gev_quantile(self, p)
    }

    /// Upper endpoint of the support (`+∞` unless `γ < 0`).
    pub fn upper_endpoint(&self) -> f64 {
        if self.gamma < -SHAPE_ZERO_TOL {
            self.mu - self.sigma / self.gamma
        } else {
            f64::INFINITY
        }
    }
}

/// `(β₀, β₁, β₂)` with `β_k = E[M G^k(M)]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PwmTriple {
    pub beta0: f64,
    pub beta1: f64,
    pub beta2: f64,
}

impl PwmTriple {
    pub fn new(beta0: f64, beta1: f64, beta2: f64) -> Self {
        PwmTriple {
            beta0,
            beta1,
            beta2,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta0, self.beta1, self.beta2]
    }

    /// PWMs of `a·M + b` given those of `M`.
    pub fn affine(&self, a: f64, b: f64) -> Self {
        PwmTriple {
            beta0: a * self.beta0 + b,
            beta1: a * self.beta1 + b / 2.0,
            beta2: a * self.beta2 + b / 3.0,
        }
    }

    /// Checks membership in the domain of [`phi`], naming the first violated
    /// inequality.
    pub fn check_domain(&self) -> Result<()> {
        let PwmTriple {
            beta0,
            beta1,
            beta2,
        } = *self;
        let checks = [
            (2.0 * beta1 - beta0, "2*beta1 - beta0 > 0"),
            (3.0 * beta2 - 2.0 * beta1, "3*beta2 - 2*beta1 > 0"),
            (-beta0 + 4.0 * beta1 - 3.0 * beta2, "-beta0 + 4*beta1 - 3*beta2 > 0"),
        ];
        for (value, violated) in checks {
            // written to also reject NaN
            if !(value > 0.0) {
                return Err(Error::OutsideDomain {
                    pwm: *self,
                    violated,
                });
            }
        }
        Ok(())
    }
}

/// Scale and location sequences `a_r = r^γ`, `b_r = (r^γ - 1)/γ` that
/// normalise maxima of i.i.d. standard GPD(γ) variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizingSequences {
    pub gamma: f64,
}

impl NormalizingSequences {
    pub fn gpd(gamma: f64) -> Self {
        NormalizingSequences { gamma }
    }

    pub fn a(&self, r: usize) -> f64 {
        (r as f64).powf(self.gamma)
    }

    pub fn b(&self, r: usize) -> f64 {
        power_ratio(r as f64, self.gamma).0
    }

    /// The GEV law approximating the maximum of `r` observations.
    pub fn block_params(&self, r: usize) -> GevParams {
        GevParams {
            mu: self.b(r),
            sigma: self.a(r),
            gamma: self.gamma,
        }
    }
}

/// `-log G_γ(z)` for the standardised argument `z`, i.e. `(1+γz)^(-1/γ)`,
/// with `+∞` below and `0` above the support.
fn neg_log_cdf_std(gamma: f64, z: f64) -> f64 {
    if z == f64::INFINITY {
        return 0.0;
    }
    if gamma.abs() < SHAPE_ZERO_TOL {
        return (-z).exp();
    }
    let t = gamma * z;
    if t <= -1.0 {
        return if gamma > 0.0 { f64::INFINITY } else { 0.0 };
    }
    (-t.ln_1p() / gamma).exp()
}

pub fn gev_cdf(params: &GevParams, x: f64) -> f64 {
    let z = (x - params.mu) / params.sigma;
    (-neg_log_cdf_std(params.gamma, z)).exp()
}

pub fn gev_quantile(params: &GevParams, p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            reason: "probability must lie in (0, 1)",
        });
    }
    Ok(quantile_from_neg_log(params, -p.ln()))
}

/// `μ + σ (c^(-γ) - 1)/γ`, the point where `-log G = c`.
fn quantile_from_neg_log(params: &GevParams, c: f64) -> f64 {
    let g = params.gamma;
    let lc = c.ln();
    let step = if g.abs() < SHAPE_ZERO_TOL {
        -lc
    } else {
        (-g * lc).exp_m1() / g
    };
    params.mu + params.sigma * step
}

/// i.i.d. draws by inverse-cdf sampling.
pub fn gev_sample<R: Rng + ?Sized>(params: &GevParams, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = rng.sample(Open01);
            quantile_from_neg_log(params, -u.ln())
        })
        .collect()
}

pub fn theoretical_pwm(params: &GevParams) -> Result<PwmTriple> {
    let g = params.gamma;
    if g >= 1.0 || g.is_nan() {
        return Err(Error::MomentsUndefined(g));
    }
    let beta = |k: usize| {
        let kp1 = (k + 1) as f64;
        let scaled = if g.abs() < SHAPE_ZERO_TOL {
            kp1.ln() + EULER_GAMMA
        } else {
            // -(1 - (k+1)^γ Γ(1-γ))/γ rewritten without cancellation
            special::gamma(1.0 - g) * power_ratio(kp1, g).0 - special::g_three(g)
        };
        (params.mu + params.sigma * scaled) / kp1
    };
    Ok(PwmTriple::new(beta(0), beta(1), beta(2)))
}

/// `(g₁, g₂, g₃)` evaluated at `γ`, continuous through zero.
pub fn g_functions(gamma: f64) -> (f64, f64, f64) {
    let (e2, _) = power_ratio(2.0, gamma);
    let (e3, _) = power_ratio(3.0, gamma);
    let g1 = e3 / e2;
    let g2 = 1.0 / (special::gamma(1.0 - gamma) * e2);
    (g1, g2, special::g_three(gamma))
}

/// Values and first derivatives of the g-functions, used by the Jacobian.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GDerivatives {
    pub g1: f64,
    pub g1_prime: f64,
    pub g2: f64,
    /// `g₂'/g₂`
    pub g2_log_prime: f64,
    pub g3: f64,
    pub g3_prime: f64,
}

pub(crate) fn g_derivatives(gamma: f64) -> GDerivatives {
    let (e2, e2p) = power_ratio(2.0, gamma);
    let (e3, e3p) = power_ratio(3.0, gamma);
    let gm = special::gamma(1.0 - gamma);
    GDerivatives {
        g1: e3 / e2,
        g1_prime: (e3p * e2 - e3 * e2p) / (e2 * e2),
        g2: 1.0 / (gm * e2),
        g2_log_prime: special::digamma(1.0 - gamma) - e2p / e2,
        g3: special::g_three(gamma),
        g3_prime: special::g_three_prime(gamma),
    }
}

pub const G1_BRACKET: (f64, f64) = (-10.0, 0.999);

fn g1_and_slope(gamma: f64) -> (f64, f64) {
    let (e2, e2p) = power_ratio(2.0, gamma);
    let (e3, e3p) = power_ratio(3.0, gamma);
    (e3 / e2, (e3p * e2 - e3 * e2p) / (e2 * e2))
}

/// Inverts the strictly increasing `g₁` on [`G1_BRACKET`] by safeguarded
/// Newton iteration.
pub fn g1_inverse(t: f64) -> Result<f64> {
    let (mut lo, mut hi) = G1_BRACKET;
    let f_lo = g1_and_slope(lo).0 - t;
    let f_hi = g1_and_slope(hi).0 - t;
    if !(f_lo < 0.0 && f_hi > 0.0) {
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        return Err(Error::NoRoot { target: t, lo, hi });
    }
    let mut x = 0.0_f64.clamp(lo, hi);
    for _ in 0..200 {
        let (g, slope) = g1_and_slope(x);
        let f = g - t;
        if f == 0.0 {
            return Ok(x);
        }
        if f < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - f / slope;
        let next = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) || hi - lo <= 1e-15 {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Maps a PWM triple to `(μ, σ, γ)` by solving for shape, scale and location
/// in turn.
pub fn phi(beta: &PwmTriple) -> Result<GevParams> {
    beta.check_domain()?;
    let d1 = 2.0 * beta.beta1 - beta.beta0;
    let t = (3.0 * beta.beta2 - beta.beta0) / d1;
    let gamma = g1_inverse(t)?;
    let (_, g2, g3) = g_functions(gamma);
    let sigma = g2 * d1;
    Ok(GevParams {
        mu: beta.beta0 + sigma * g3,
        sigma,
        gamma,
    })
}

/// The bivariate extreme value cdf `G_{γ,ξ}` with Pickands function
/// `A_ξ(w) = (1∧ξ) + (1 - 1∧ξ)·max(w, 1-w)`.
pub fn bivariate_cdf(gamma: f64, xi: f64, x: f64, y: f64) -> f64 {
    if xi.is_nan() || xi < 0.0 {
        return f64::NAN;
    }
    let ux = neg_log_cdf_std(gamma, x);
    let uy = neg_log_cdf_std(gamma, y);
    if ux.is_infinite() || uy.is_infinite() {
        return 0.0;
    }
    let w = xi.min(1.0);
    // u(x ∧ y) = max(u(x), u(y)) since u is decreasing
    let exponent = w * (ux + uy) + (1.0 - w) * ux.max(uy);
    (-exponent).exp()
}

/// Cdf of the standard GPD(0, 1, γ).
pub fn gpd_cdf(gamma: f64, x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 {
        return 0.0;
    }
    if gamma.abs() < SHAPE_ZERO_TOL {
        return -(-x).exp_m1();
    }
    if gamma < 0.0 && x >= -1.0 / gamma {
        return 1.0;
    }
    -(-(gamma * x).ln_1p() / gamma).exp_m1()
}

/// Quantile of the standard GPD(0, 1, γ).
pub fn gpd_quantile(gamma: f64, p: f64) -> f64 {
    gpd_upper_quantile(gamma, 1.0 - p)
}

/// GPD quantile parametrised by the upper-tail probability `q = 1 - p`,
/// which keeps full relative precision for `q` near zero.
pub fn gpd_upper_quantile(gamma: f64, q: f64) -> f64 {
    let lq = q.ln();
    if gamma.abs() < SHAPE_ZERO_TOL {
        -lq
    } else {
        (-gamma * lq).exp_m1() / gamma
    }
}

/// The level exceeded once every `t` blocks on average, `G^{-1}(1 - 1/t)`.
/// Requires `t > 1`.
pub fn return_level(params: &GevParams, t: f64) -> f64 {
    quantile_from_neg_log(params, -(-1.0 / t).ln_1p())
}
