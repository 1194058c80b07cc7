//! Empirical probability weighted moments and the PWM fit of the GEV law to
//! block maxima.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{self, BlockMaximaSample, Scheme};
use crate::error::{Error, Result};
use crate::gev::{self, GevParams, PwmTriple};

/// A PWM estimate of `(b_r, a_r, γ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevFit {
    pub params: GevParams,
    pub pwm: PwmTriple,
    /// Length of the source series.
    pub n: usize,
    pub r: usize,
    pub scheme: Scheme,
}

impl GevFit {
    pub fn return_level(&self, t: f64) -> f64 {
        gev::return_level(&self.params, t)
    }
}

/// Unbiased PWM estimators from the order statistics of `sample`.
pub fn empirical_pwm(sample: &[f64]) -> Result<PwmTriple> {
    let m = sample.len();
    if m < 3 {
        return Err(Error::InsufficientSample { need: 3, got: m });
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mf = m as f64;
    let d1 = mf - 1.0;
    let d2 = (mf - 1.0) * (mf - 2.0);
    let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for (i, &x) in sorted.iter().enumerate() {
        // zero-based: (i-1) -> i, (i-2) -> i-1
        let i = i as f64;
        s0 += x;
        s1 += i / d1 * x;
        s2 += i * (i - 1.0) / d2 * x;
    }
    Ok(PwmTriple::new(s0 / mf, s1 / mf, s2 / mf))
}

fn fit_from_triple(pwm: PwmTriple, n: usize, r: usize, scheme: Scheme) -> Result<GevFit> {
    let params = gev::phi(&pwm).map_err(|cause| Error::Fit {
        pwm,
        cause: Box::new(cause),
    })?;
    Ok(GevFit {
        params,
        pwm,
        n,
        r,
        scheme,
    })
}

/// Fits a plain sample, taken as disjoint maxima of blocks of size one.
pub fn fit_pwm(sample: &[f64]) -> Result<GevFit> {
    let pwm = empirical_pwm(sample)?;
    fit_from_triple(pwm, sample.len(), 1, Scheme::Disjoint)
}

pub fn fit_sample(sample: &BlockMaximaSample) -> Result<GevFit> {
    let pwm = empirical_pwm(&sample.values)?;
    fit_from_triple(pwm, sample.n, sample.r, sample.scheme)
}

pub fn fit_disjoint(series: &[f64], r: usize) -> Result<GevFit> {
    fit_sample(&blocks::disjoint_maxima(series, r)?)
}

pub fn fit_sliding(series: &[f64], r: usize) -> Result<GevFit> {
    fit_sample(&blocks::sliding_maxima(series, r)?)
}

pub fn fit_circular(seasonal_series: &[f64], r: usize) -> Result<GevFit> {
    fit_sample(&blocks::circular_sliding_maxima(seasonal_series, r)?)
}

pub fn fit_scheme(series: &[f64], r: usize, scheme: Scheme) -> Result<GevFit> {
    fit_sample(&blocks::block_maxima(series, r, scheme)?)
}

/// Longest series accepted by [`bias_reduced_sliding_pwm`]; the cost is
/// quadratic in the number of windows.
pub const BIAS_REDUCED_MAX_LEN: usize = 20_000;

/// Ordered pairs `(p, q)` from `idx` (sorted ascending) with
/// `|idx_p - idx_q| >= r`, including none with `p = q`.
fn separated_ordered_pairs(idx: &[usize], r: usize) -> u64 {
    let k = idx.len() as u64;
    let mut close = 0u64;
    let mut hi = 0usize;
    for (p, &i) in idx.iter().enumerate() {
        if hi < p {
            hi = p;
        }
        while hi + 1 < idx.len() && idx[hi + 1] - i < r {
            hi += 1;
        }
        close += (hi - p) as u64;
    }
    // `close` counts unordered close pairs p < q; add the diagonal
    k * k - (2 * close + k)
}

/// Sliding PWMs with the first and second moments averaged only over
/// windows that are pairwise disjoint, which removes the bias caused by
/// overlapping windows sharing their maximum.
pub fn bias_reduced_sliding_pwm(series: &[f64], r: usize) -> Result<PwmTriple> {
    if series.len() > BIAS_REDUCED_MAX_LEN {
        return Err(Error::parameter(
            "series",
            format!(
                "length {} exceeds the limit {BIAS_REDUCED_MAX_LEN} of the bias-reduced estimator",
                series.len()
            ),
        ));
    }
    let maxima = blocks::sliding_maxima(series, r)?.values;
    let m = maxima.len();

    // per window i: (Σ_j M_i 1{M_j ≤ M_i}, |D2 at i|, Σ over (j, j'), |D3 at i|)
    let per_window: Vec<(f64, u64, f64, u64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mi = maxima[i];
            let far: Vec<usize> = (0..m).filter(|&j| j.abs_diff(i) >= r).collect();
            let below: Vec<usize> = far.iter().copied().filter(|&j| maxima[j] <= mi).collect();
            let pairs_total = far.len() as u64;
            let triples_total = separated_ordered_pairs(&far, r);
            let triples_below = separated_ordered_pairs(&below, r);
            (
                mi * below.len() as f64,
                pairs_total,
                mi * triples_below as f64,
                triples_total,
            )
        })
        .collect();

    let (mut s1, mut d2, mut s2, mut d3) = (0.0, 0u64, 0.0, 0u64);
    for &(a, b, c, d) in &per_window {
        s1 += a;
        d2 += b;
        s2 += c;
        d3 += d;
    }
    if d2 == 0 {
        return Err(Error::InsufficientSpan(format!(
            "no two disjoint windows of length {r} among {m} sliding windows"
        )));
    }
    if d3 == 0 {
        return Err(Error::InsufficientSpan(format!(
            "no three pairwise disjoint windows of length {r} among {m} sliding windows"
        )));
    }
    // same summation order as the plain estimator, so the two agree exactly
    let beta0 = empirical_pwm(&maxima)?.beta0;
    Ok(PwmTriple::new(beta0, s1 / d2 as f64, s2 / d3 as f64))
}

/// Only the first-order bias-reduced moment, which exists on shorter series
/// than the full triple.
pub fn bias_reduced_beta1(series: &[f64], r: usize) -> Result<f64> {
    let maxima = blocks::sliding_maxima(series, r)?.values;
    let m = maxima.len();
    let (mut s1, mut d2) = (0.0, 0u64);
    for i in 0..m {
        for j in 0..m {
            if j.abs_diff(i) >= r {
                d2 += 1;
                if maxima[j] <= maxima[i] {
                    s1 += maxima[i];
                }
            }
        }
    }
    if d2 == 0 {
        return Err(Error::InsufficientSpan(format!(
            "no two disjoint windows of length {r} among {m} sliding windows"
        )));
    }
    Ok(s1 / d2 as f64)
}

/// PWM fit using [`bias_reduced_sliding_pwm`].
pub fn fit_bias_reduced(series: &[f64], r: usize) -> Result<GevFit> {
    let pwm = bias_reduced_sliding_pwm(series, r)?;
    fit_from_triple(pwm, series.len(), r, Scheme::Sliding)
}
