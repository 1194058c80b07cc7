//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

pub mod properties;

use blockmax::gev::{self, GevParams, PwmTriple};
use blockmax::quad::{integrate, Tolerance};

const TOL: Tolerance = Tolerance {
    abs: 1e-13,
    rel: 1e-10,
    max_intervals: 2000,
};

/// `x(s) = (s^{-γ} - 1)/γ`, the GEV point whose `-log G` equals `s`.
pub fn gev_point(gamma: f64, s: f64) -> f64 {
    if gamma == 0.0 {
        -s.ln()
    } else {
        (-gamma * s.ln()).exp_m1() / gamma
    }
}

/// `-log G_{γ,ξ}(x(s), x(t))` for the bivariate law with Pickands function
/// `A(w) = ξ + (1-ξ) max(w, 1-w)`.
pub fn joint_exponent(xi: f64, s: f64, t: f64) -> f64 {
    xi * (s + t) + (1.0 - xi) * s.max(t)
}

/// Relative deviation of `exp(-joint_exponent)` from the library cdf.
pub fn joint_exponent_mismatch(gamma: f64, xi: f64, s: f64, t: f64) -> f64 {
    let lib = gev::bivariate_cdf(gamma, xi, gev_point(gamma, s), gev_point(gamma, t));
    let own = (-joint_exponent(xi, s, t)).exp();
    ((lib - own) / own).abs()
}

/// The product-measure weight `e^{-ks-k't}(st)^{-γ-1}` times `e^{-s-t}`.
fn weight(gamma: f64, k: f64, kp: f64, s: f64, t: f64) -> f64 {
    (-(k + 1.0) * s - (kp + 1.0) * t).exp() * (s * t).powf(-gamma - 1.0)
}

/// Integrates `f(s, t) · weight` over the positive quadrant. The inner
/// integral splits at the diagonal; both pieces remove the endpoint
/// singularities by power substitutions.
fn quadrant<F: Fn(f64, f64) -> f64>(gamma: f64, k: f64, kp: f64, tol: Tolerance, f: F) -> f64 {
    let g = |s: f64, t: f64| f(s, t) * weight(gamma, k, kp, s, t);
    let inner = |s: f64| {
        let m = 2.0 / (1.0 - gamma);
        let low = integrate(
            |tau: f64| {
                if tau <= 0.0 {
                    return 0.0;
                }
                let t = s * tau.powf(m);
                s * m * tau.powf(m - 1.0) * g(s, t)
            },
            0.0,
            1.0,
            tol,
        );
        let v_max = (40.0 / s).max(1.0).ln() + 1.0;
        let high = integrate(
            |v: f64| {
                let t = s * v.exp();
                t * g(s, t)
            },
            0.0,
            v_max,
            tol,
        );
        low.value + high.value
    };
    let m = 2.0 / (1.0 - 2.0 * gamma.max(0.0));
    let head = integrate(
        |tau: f64| {
            if tau <= 0.0 {
                return 0.0;
            }
            m * tau.powf(m - 1.0) * inner(tau.powf(m))
        },
        0.0,
        1.0,
        tol,
    );
    let tail = integrate(inner, 1.0, 40.0, tol);
    head.value + tail.value
}

/// Hoeffding's identity for `Cov(f_k(Z₁), f_k'(Z₂))`, `f_k = G^k`,
/// `(Z₁, Z₂) ~ G_{γ,ξ}`, in the exponential scale `S = -log G(Z)`:
/// `∫∫ (e^{-E(s,t)} - e^{-s-t}) e^{-ks-k't} (st)^{-γ-1} ds dt`.
/// The bracket equals `e^{-s-t} expm1(s + t - E)`.
pub fn hoeffding_cov(gamma: f64, xi: f64, k: usize, kp: usize) -> f64 {
    quadrant(gamma, k as f64, kp as f64, TOL, |s, t| {
        (s + t - joint_exponent(xi, s, t)).exp_m1()
    })
}

/// `∫_0^1 expm1((1-ξ)m) dξ = (e^m - 1 - m)/m`.
fn xi_averaged_bracket(m: f64) -> f64 {
    if m < 1e-3 {
        m / 2.0 + m * m / 6.0 + m * m * m / 24.0
    } else {
        (m.exp_m1() - m) / m
    }
}

/// Sliding-blocks covariance entry `2 ∫_0^1 Cov(f_k(Z₁ξ), f_k'(Z₂ξ)) dξ`,
/// with the ξ integral taken inside the integrand in closed form.
pub fn hoeffding_sliding(gamma: f64, k: usize, kp: usize) -> f64 {
    2.0 * quadrant(gamma, k as f64, kp as f64, TOL, |s, t| {
        xi_averaged_bracket(s.min(t))
    })
}

/// Disjoint-blocks covariance entry: the identity under complete
/// dependence `ξ = 0`.
pub fn hoeffding_disjoint(gamma: f64, k: usize, kp: usize) -> f64 {
    hoeffding_cov(gamma, 0.0, k, kp)
}
/// Central-difference Jacobian of PWMs ↦ (shape, scale, location) at the
/// PWMs of GEV(0, 1, γ).
pub fn fd_jacobian(gamma: f64, h: f64) -> [[f64; 3]; 3] {
    let beta = gev::theoretical_pwm(&GevParams::standard(gamma)).unwrap().as_array();
    let mut out = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut up = beta;
        let mut dn = beta;
        up[j] += h;
        dn[j] -= h;
        let pu = gev::phi(&PwmTriple::new(up[0], up[1], up[2])).unwrap();
        let pd = gev::phi(&PwmTriple::new(dn[0], dn[1], dn[2])).unwrap();
        out[0][j] = (pu.gamma - pd.gamma) / (2.0 * h);
        out[1][j] = (pu.sigma - pd.sigma) / (2.0 * h);
        out[2][j] = (pu.mu - pd.mu) / (2.0 * h);
    }
    out
}
