//! Asymptotic covariance of the PWM estimators, the Jacobian of the map from
//! PWMs to parameters, and normal-approximation return-level intervals.
//!
//! Coordinates of `Σ` and of the return-level gradient are ordered
//! (shape, scale, location), matching the estimator vector
//! `(γ̂ - γ, (â - a)/a, (b̂ - b)/a)`.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::blocks::Scheme;
use crate::error::{Error, Result};
use crate::gev;
use crate::pwm::GevFit;
use crate::quad::{integrate, Tolerance};
use crate::special::{self, expm1_ratio, SHAPE_ZERO_TOL};

/// Admissible shapes for the covariance formulas, `(-1, 1/2)`.
pub const SHAPE_RANGE: (f64, f64) = (-1.0, 0.5);

/// A symmetric 3×3 covariance tagged with its block scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovMatrix3 {
    pub entries: Matrix3<f64>,
    pub mode: Scheme,
}

impl CovMatrix3 {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn diagonal(&self) -> [f64; 3] {
        [self.get(0, 0), self.get(1, 1), self.get(2, 2)]
    }

    pub fn to_array(&self) -> [[f64; 3]; 3] {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.get(i, j);
            }
        }
        out
    }

    pub fn quadratic_form(&self, v: &[f64; 3]) -> f64 {
        let v = Vector3::from_column_slice(v);
        (v.transpose() * self.entries * v)[(0, 0)]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.entries).eigenvalues.min()
    }

    /// Largest absolute asymmetry `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        (self.entries - self.entries.transpose()).abs().max()
    }
}

fn check_shape(gamma: f64) -> Result<()> {
    let (lo, hi) = SHAPE_RANGE;
    if gamma > lo && gamma < hi {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "gamma",
            value: gamma,
            reason: "covariance formulas require a shape in (-1, 0.5)",
        })
    }
}

fn symmetric_from(mut f: impl FnMut(usize, usize) -> f64) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for i in 0..3 {
        for j in i..3 {
            let v = f(i, j);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

const INNER_TOL: Tolerance = Tolerance {
    abs: 1e-15,
    rel: 1e-12,
    max_intervals: 2000,
};

const OUTER_TOL: Tolerance = Tolerance {
    abs: 1e-12,
    rel: 1e-12,
    max_intervals: 2000,
};

/// `∫_0^∞ exp(-c x e^v - γ v) dv`, which equals `x^γ ∫_x^∞ e^{-c y} y^{-1-γ} dy`.
fn disjoint_inner(c: f64, gamma: f64, x: f64) -> f64 {
    let v_max = (60.0 / (c * x)).max(1.0).ln() + 2.0;
    integrate(
        |v: f64| (-c * x * v.exp() - gamma * v).exp(),
        0.0,
        v_max,
        INNER_TOL,
    )
    .value
}

/// `H_{k,k'}` after the substitutions `u = e^{-x}`, `s = e^{-y}`:
/// `∫_0^∞ e^{-kx} (1 - e^{-x}) x^{-1-2γ} J_{k'}(x) dx`.
fn disjoint_h(k: usize, kp: usize, gamma: f64) -> f64 {
    let c = (kp + 1) as f64;
    let kf = k as f64;
    let integrand = |x: f64| {
        if x <= 0.0 {
            return 0.0;
        }
        (-kf * x).exp() * -(-x).exp_m1() * x.powf(-1.0 - 2.0 * gamma) * disjoint_inner(c, gamma, x)
    };
    // x = t^m removes the x^{-2γ} endpoint behaviour
    let m = 2.0 / (1.0 - 2.0 * gamma.max(0.0));
    let head = integrate(
        |t: f64| {
            if t <= 0.0 {
                return 0.0;
            }
            m * t.powf(m - 1.0) * integrand(t.powf(m))
        },
        0.0,
        1.0,
        OUTER_TOL,
    );
    let tail = integrate(integrand, 1.0, 60.0, OUTER_TOL);
    head.value + tail.value
}

/// Asymptotic covariance of the disjoint-blocks PWM estimators at the
/// standard GEV(0, 1, γ) law.
pub fn omega_disjoint(gamma: f64) -> Result<CovMatrix3> {
    check_shape(gamma)?;
    let mut h = [[0.0; 3]; 3];
    for (k, row) in h.iter_mut().enumerate() {
        for (kp, v) in row.iter_mut().enumerate() {
            *v = disjoint_h(k, kp, gamma);
        }
    }
    Ok(CovMatrix3 {
        entries: symmetric_from(|i, j| h[i][j] + h[j][i]),
        mode: Scheme::Disjoint,
    })
}

/// `f(x)/(2γ)` where `f(x) = (1 - (1-x)^p)/(p x) - 1`, `p = 2γ + 1`, so that
/// `h_{γ,k,k'}(w) = 2γ A^{2γ} F(x)` with `A = c_{k,k'}(w) + 1` and `x = w/A`.
/// Continuous in γ, including `γ = 0` and `γ = -1/2`.
fn sliding_kernel(gamma: f64, x: f64) -> f64 {
    let p = 2.0 * gamma + 1.0;
    if x < 0.25 || gamma.abs() < 0.05 {
        // Σ_{l≥1} (-1)^l Π_{i=2}^{l} (p - i) x^l / (l+1)!
        let mut term = -x / 2.0;
        let mut sum = term;
        for l in 2..400 {
            term *= -(p - l as f64) * x / (l + 1) as f64;
            sum += term;
            if term.abs() <= 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else if (gamma + 0.5).abs() < SHAPE_ZERO_TOL {
        // p = 0: f(x) = -log(1-x)/x - 1 and 2γ = -1
        1.0 + (-x).ln_1p() / x
    } else {
        let l = (-x).ln_1p();
        let f = -l * expm1_ratio(p * l).0 / x - 1.0;
        f / (2.0 * gamma)
    }
}

/// Asymptotic covariance of the sliding-blocks PWM estimators at the
/// standard GEV(0, 1, γ) law.
pub fn omega_sliding(gamma: f64) -> Result<CovMatrix3> {
    check_shape(gamma)?;
    // 2 C_γ h = -2 Γ(1-2γ) A^{2γ} F for every γ, with C_0 = 1
    let scale = -2.0 * special::gamma(1.0 - 2.0 * gamma);
    let term = |k: f64, kp: f64, w: f64| {
        let a = k * w + kp * (1.0 - w) + 1.0;
        a.powf(2.0 * gamma) * sliding_kernel(gamma, w / a)
    };
    let m = 2.0 / (1.0 - gamma);
    let t_max = 0.5f64.powf(1.0 / m);
    let entry = |k: usize, kp: usize| {
        let (k, kp) = (k as f64, kp as f64);
        let est = integrate(
            |t: f64| {
                if t <= 0.0 {
                    return 0.0;
                }
                let w = t.powf(m);
                let num = term(k, kp, w) + term(kp, k, w);
                m * t.powf(m - 1.0) * num / (w * (1.0 - w)).powf(1.0 + gamma)
            },
            0.0,
            t_max,
            OUTER_TOL,
        );
        scale * est.value
    };
    Ok(CovMatrix3 {
        entries: symmetric_from(entry),
        mode: Scheme::Sliding,
    })
}

/// Covariance of the scheme's variance regime (circular maps to sliding).
pub fn omega(gamma: f64, mode: Scheme) -> Result<CovMatrix3> {
    match mode.variance_mode() {
        Scheme::Disjoint => omega_disjoint(gamma),
        _ => omega_sliding(gamma),
    }
}

/// Jacobian of PWMs ↦ (shape, scale, location) at the PWMs of GEV(0, 1, γ).
/// Rows follow (shape, scale, location), columns (β₀, β₁, β₂).
pub fn jacobian(gamma: f64) -> Matrix3<f64> {
    let g = gev::g_derivatives(gamma);
    let lead = g.g2 / g.g1_prime;
    let shape = [lead * (g.g1 - 1.0), -2.0 * lead * g.g1, 3.0 * lead];
    let base = [-1.0, 2.0, 0.0];
    let scale: [f64; 3] = std::array::from_fn(|j| g.g2 * base[j] + g.g2_log_prime * shape[j]);
    let unit = [1.0, 0.0, 0.0];
    let location: [f64; 3] =
        std::array::from_fn(|j| unit[j] + g.g3_prime * shape[j] + g.g3 * scale[j]);
    Matrix3::from_rows(&[
        Vector3::from(shape).transpose(),
        Vector3::from(scale).transpose(),
        Vector3::from(location).transpose(),
    ])
}

/// Asymptotic covariance `C Ω Cᵀ` of the parameter estimators.
pub fn sigma(gamma: f64, mode: Scheme) -> Result<CovMatrix3> {
    let om = omega(gamma, mode)?;
    let c = jacobian(gamma);
    let s = c * om.entries * c.transpose();
    Ok(CovMatrix3 {
        // symmetrise away rounding of the congruence
        entries: (s + s.transpose()) * 0.5,
        mode: om.mode,
    })
}

/// Gradient of the `t`-block return level in (shape, scale, location),
/// divided by the scale.
pub fn qt_vector(gamma: f64, t: f64) -> [f64; 3] {
    let c = -(-1.0 / t).ln_1p();
    let l = c.ln();
    // with z = -γ log c: (c^{-γ} - 1)/γ = -l E(z) and
    // (1 - c^{-γ}(γ log c + 1))/γ² = l² E'(z), E(z) = expm1(z)/z
    let (e, de) = expm1_ratio(-gamma * l);
    [l * l * de, -l * e, 1.0]
}

/// Asymptotic variance `q_Tᵀ Σ q_T` of the normalised return-level estimator.
pub fn rl_variance(gamma: f64, t: f64, mode: Scheme) -> Result<f64> {
    let s = sigma(gamma, mode)?;
    Ok(s.quadratic_form(&qt_vector(gamma, t)).max(0.0))
}

/// Plug-in normal confidence interval for the `t`-block return level,
/// `RL ± â sqrt((r/n) q_Tᵀ Σ q_T) u_{1-α/2}`.
pub fn rl_confidence_interval(fit: &GevFit, t: f64, level: f64) -> Result<(f64, f64)> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain {
            name: "level",
            value: level,
            reason: "confidence level must lie in (0, 1)",
        });
    }
    if !(t > 1.0) {
        return Err(Error::Domain {
            name: "T",
            value: t,
            reason: "return period must exceed one block",
        });
    }
    let var = rl_variance(fit.params.gamma, t, fit.scheme)?;
    let u = special::normal_quantile(0.5 + level / 2.0);
    let half = fit.params.sigma * ((fit.r as f64 / fit.n as f64) * var).sqrt() * u;
    let center = fit.return_level(t);
    Ok((center - half, center + half))
}
