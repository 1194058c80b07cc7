//! Linear location trend against a per-season covariate, detrending, and the
//! trended-location parametric bootstrap.
//!
//! The model for the maximum of season `t` is `GEV(b + c x_t, a, γ)`. The
//! daily series is laid out season by season, `r` observations per season.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blocks::{self, Scheme};
use crate::error::{Error, Result};
use crate::gev::{self, GevParams};
use crate::pwm::{self, GevFit};
use crate::rng;
use crate::special::power_ratio;

/// Smallest accepted number of bootstrap replicates.
pub const MIN_BOOTSTRAP: usize = 100;

/// Sen's slope: the median of all pairwise slopes `(M_j - M_i)/(x_j - x_i)`
/// over pairs with distinct covariates. An even count averages the two
/// middle slopes.
pub fn sen_slope(x: &[f64], m: &[f64]) -> Result<f64> {
    if x.len() != m.len() {
        return Err(Error::Shape(format!(
            "{} covariate values for {} responses",
            x.len(),
            m.len()
        )));
    }
    let mut slopes = Vec::with_capacity(x.len() * x.len().saturating_sub(1) / 2);
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            let dx = x[j] - x[i];
            if dx != 0.0 {
                slopes.push((m[j] - m[i]) / dx);
            }
        }
    }
    if slopes.is_empty() {
        return Err(Error::DegenerateCovariate);
    }
    if let Some(i) = slopes.iter().position(|s| s.is_nan()) {
        return Err(Error::NonFinite(i));
    }
    slopes.sort_by(f64::total_cmp);
    let k = slopes.len();
    Ok(if k % 2 == 1 {
        slopes[k / 2]
    } else {
        0.5 * (slopes[k / 2 - 1] + slopes[k / 2])
    })
}

fn check_layout(daily: &[f64], covariate: &[f64], r: usize) -> Result<()> {
    if r == 0 {
        return Err(Error::parameter("r", "block size must be at least 1"));
    }
    if daily.len() != r * covariate.len() {
        return Err(Error::Shape(format!(
            "{} daily values do not form {} seasons of length {r}",
            daily.len(),
            covariate.len()
        )));
    }
    Ok(())
}

fn shift_seasons(daily: &[f64], covariate: &[f64], r: usize, slope: f64) -> Result<Vec<f64>> {
    check_layout(daily, covariate, r)?;
    Ok(daily
        .chunks_exact(r)
        .zip(covariate)
        .flat_map(|(season, &x)| season.iter().map(move |&v| v + slope * x))
        .collect())
}

/// Subtracts `slope · covariate[j]` from every observation of season `j`.
pub fn detrend(daily: &[f64], covariate: &[f64], r: usize, slope: f64) -> Result<Vec<f64>> {
    shift_seasons(daily, covariate, r, -slope)
}

/// Inverse of [`detrend`].
pub fn retrend(detrended: &[f64], covariate: &[f64], r: usize, slope: f64) -> Result<Vec<f64>> {
    shift_seasons(detrended, covariate, r, slope)
}

/// A GEV fit of the detrended block maxima together with the location slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendedFit {
    pub slope: f64,
    /// Fit of the detrended maxima; `params.mu` is `b̂`.
    pub base: GevFit,
    /// One value per season.
    pub covariate: Vec<f64>,
}

impl TrendedFit {
    /// Location `b̂ + ĉ x_t` of the maximum of season `t`.
    pub fn location(&self, season: usize) -> f64 {
        self.base.params.mu + self.slope * self.covariate[season]
    }

    /// `RL_t(T, r) = RL(T, r) + ĉ x_t`.
    pub fn return_level(&self, t: f64, season: usize) -> f64 {
        self.base.return_level(t) + self.slope * self.covariate[season]
    }
}

fn fit_mode(series: &[f64], r: usize, mode: Scheme) -> Result<GevFit> {
    pwm::fit_scheme(series, r, mode)
}

fn season_maxima(daily: &[f64], r: usize) -> Result<Vec<f64>> {
    Ok(blocks::disjoint_maxima(daily, r)?.values)
}

/// Estimates the slope on the season maxima, detrends the daily series and
/// fits the detrended series under `mode`.
pub fn fit_trended(daily: &[f64], covariate: &[f64], r: usize, mode: Scheme) -> Result<TrendedFit> {
    check_layout(daily, covariate, r)?;
    let slope = sen_slope(covariate, &season_maxima(daily, r)?)?;
    let detrended = detrend(daily, covariate, r, slope)?;
    Ok(TrendedFit {
        slope,
        base: fit_mode(&detrended, r, mode)?,
        covariate: covariate.to_vec(),
    })
}

/// Parameters of the daily law whose maximum over `r` i.i.d. draws is
/// `GEV(b̂ + ĉ x_t, â, γ̂)`: `ã = â r^{-γ̂}`, `b̃_t = b̂ + ĉ x_t - â (1 - r^{-γ̂})/γ̂`.
pub fn bootstrap_tilde_params(theta_hat: &GevParams, c_hat: f64, x_t: f64, r: usize) -> GevParams {
    let g = theta_hat.gamma;
    let rf = r as f64;
    // (1 - r^{-γ})/γ with its γ = 0 limit log r
    let (shift, _) = power_ratio(rf, -g);
    GevParams {
        mu: theta_hat.mu + c_hat * x_t - theta_hat.sigma * shift,
        sigma: theta_hat.sigma * rf.powf(-g),
        gamma: g,
    }
}

/// A symmetric interval `center ± eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricCi {
    pub lo: f64,
    pub hi: f64,
    pub eps: f64,
    /// False when no `eps` within the bootstrap range reaches the level;
    /// the interval then covers every bootstrap value.
    pub attained: bool,
}

/// Smallest `eps ≥ 0` whose closed interval `[center - eps, center + eps]`
/// holds at least a fraction `level` of `boot_values`. This is the
/// `⌈level·n⌉`-th smallest absolute deviation from `center`.
pub fn symmetric_percentile_ci(boot_values: &[f64], center: f64, level: f64) -> Result<SymmetricCi> {
    if boot_values.is_empty() {
        return Err(Error::InsufficientSample { need: 1, got: 0 });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain {
            name: "level",
            value: level,
            reason: "must lie in (0, 1)",
        });
    }
    if let Some(i) = boot_values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let n = boot_values.len();
    let mut dev: Vec<f64> = boot_values.iter().map(|v| (v - center).abs()).collect();
    dev.sort_by(f64::total_cmp);
    // smallest k with k/n >= level, robust to level·n rounding up
    let mut k = ((level * n as f64).ceil() as usize).clamp(1, n);
    while k > 1 && (k - 1) as f64 / n as f64 >= level {
        k -= 1;
    }
    let eps = dev[k - 1];
    let (min, max) = boot_values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = max - min;
    if eps > range {
        let full = dev[n - 1];
        return Ok(SymmetricCi {
            lo: center - full,
            hi: center + full,
            eps: full,
            attained: false,
        });
    }
    Ok(SymmetricCi {
        lo: center - eps,
        hi: center + eps,
        eps,
        attained: true,
    })
}

/// Settings of [`parametric_bootstrap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub mode: Scheme,
    /// Generate with `ĉ = 0` and skip re-estimating and removing the trend.
    pub stationary: bool,
    pub seed: u64,
    pub return_period: f64,
    pub level: f64,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, mode: Scheme, stationary: bool, seed: u64) -> Self {
        BootstrapConfig {
            replicates,
            mode,
            stationary,
            seed,
            return_period: 100.0,
            level: 0.95,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < MIN_BOOTSTRAP {
            return Err(Error::parameter(
                "replicates",
                format!("need at least {MIN_BOOTSTRAP}, got {}", self.replicates),
            ));
        }
        if !(self.return_period > 1.0) {
            return Err(Error::parameter("return_period", "must exceed 1"));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::parameter("level", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// One bootstrap re-estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub slope: f64,
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
    /// Return level of the detrended law.
    pub return_level: f64,
}

impl Replicate {
    fn from_fit(slope: f64, fit: &GevFit, t: f64) -> Self {
        Replicate {
            slope,
            location: fit.params.mu,
            scale: fit.params.sigma,
            shape: fit.params.gamma,
            return_level: fit.return_level(t),
        }
    }
}

/// Bootstrap output: the point estimate, the surviving replicates, their
/// standard deviations and symmetric percentile intervals for the return
/// levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapResult {
    pub config: BootstrapConfig,
    pub estimate: Replicate,
    pub replicates: Vec<Replicate>,
    pub failures: usize,
    pub std_errors: Replicate,
    /// Interval for the return level of the detrended law.
    pub return_level_ci: SymmetricCi,
    /// Point estimate `RL_t(T, r)` per season.
    pub season_return_levels: Vec<f64>,
    /// Interval for `RL_t(T, r)` per season.
    pub season_cis: Vec<SymmetricCi>,
}

fn std_dev(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = values.clone().count() as f64;
    if n < 2.0 {
        return f64::NAN;
    }
    let mean = values.clone().sum::<f64>() / n;
    (values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Parametric bootstrap of the trended-location model.
///
/// Every replicate draws each season as `r` i.i.d. values from the
/// [`bootstrap_tilde_params`] law, re-estimates the slope on the season
/// maxima, detrends and refits under `config.mode`. With `stationary` the
/// data are generated with zero slope and the trend steps are skipped.
/// A `None` covariate means a stationary series without any trend; it
/// requires `stationary`.
pub fn parametric_bootstrap(
    daily: &[f64],
    covariate: Option<&[f64]>,
    r: usize,
    config: &BootstrapConfig,
) -> Result<BootstrapResult> {
    config.validate()?;
    let (covariate, slope) = match covariate {
        Some(x) => {
            check_layout(daily, x, r)?;
            let slope = sen_slope(x, &season_maxima(daily, r)?)?;
            (x.to_vec(), slope)
        }
        None => {
            if !config.stationary {
                return Err(Error::parameter(
                    "covariate",
                    "required unless the bootstrap is stationary",
                ));
            }
            if r == 0 || daily.len() % r != 0 {
                return Err(Error::Shape(format!(
                    "{} daily values do not form seasons of length {r}",
                    daily.len()
                )));
            }
            (vec![0.0; daily.len() / r], 0.0)
        }
    };
    let detrended = detrend(daily, &covariate, r, slope)?;
    let fit = fit_mode(&detrended, r, config.mode)?;
    let t = config.return_period;
    let estimate = Replicate::from_fit(slope, &fit, t);
    let gen_slope = if config.stationary { 0.0 } else { slope };

    let outcomes: Vec<Result<Replicate>> = (0..config.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(config.seed, &[b as u64]);
            let mut sample = Vec::with_capacity(daily.len());
            for &x in &covariate {
                let tilde = bootstrap_tilde_params(&fit.params, gen_slope, x, r);
                sample.extend(gev::gev_sample(&tilde, r, &mut rng));
            }
            if config.stationary {
                let refit = fit_mode(&sample, r, config.mode)?;
                return Ok(Replicate::from_fit(0.0, &refit, t));
            }
            let c_star = sen_slope(&covariate, &season_maxima(&sample, r)?)?;
            let refit = fit_mode(&detrend(&sample, &covariate, r, c_star)?, r, config.mode)?;
            Ok(Replicate::from_fit(c_star, &refit, t))
        })
        .collect();
    let replicates: Vec<Replicate> = outcomes.iter().filter_map(|o| o.as_ref().ok().copied()).collect();
    let failures = config.replicates - replicates.len();
    if replicates.is_empty() {
        return Err(Error::InsufficientSample {
            need: 1,
            got: 0,
        });
    }

    let std_errors = Replicate {
        slope: std_dev(replicates.iter().map(|p| p.slope)),
        location: std_dev(replicates.iter().map(|p| p.location)),
        scale: std_dev(replicates.iter().map(|p| p.scale)),
        shape: std_dev(replicates.iter().map(|p| p.shape)),
        return_level: std_dev(replicates.iter().map(|p| p.return_level)),
    };
    let rl_boot: Vec<f64> = replicates.iter().map(|p| p.return_level).collect();
    let return_level_ci = symmetric_percentile_ci(&rl_boot, estimate.return_level, config.level)?;
    let mut season_return_levels = Vec::with_capacity(covariate.len());
    let mut season_cis = Vec::with_capacity(covariate.len());
    for &x in &covariate {
        let center = estimate.return_level + slope * x;
        let boot: Vec<f64> = replicates.iter().map(|p| p.return_level + p.slope * x).collect();
        season_return_levels.push(center);
        season_cis.push(symmetric_percentile_ci(&boot, center, config.level)?);
    }
    Ok(BootstrapResult {
        config: config.clone(),
        estimate,
        replicates,
        failures,
        std_errors,
        return_level_ci,
        season_return_levels,
        season_cis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sen_slope_examples() {
        for c in [0.0, 1.5, -3.25, 1e6] {
            assert_eq!(sen_slope(&[0.0, 1.0, 2.0], &[0.0, c, 2.0 * c]).unwrap(), c);
        }
        assert_eq!(sen_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 2.0]).unwrap(), 0.5);
        assert_eq!(sen_slope(&[1.0, 1.0], &[0.0, 5.0]), Err(Error::DegenerateCovariate));
        // slopes {1, 2, 3, ..}: even count averages the middle pair
        assert_eq!(sen_slope(&[0.0, 1.0, 1.0], &[0.0, 1.0, 3.0]).unwrap(), 2.0);
        assert!(matches!(sen_slope(&[0.0], &[1.0, 2.0]), Err(Error::Shape(_))));
    }

    #[test]
    fn detrend_examples() {
        let daily = vec![5.0; 6];
        let x = [0.0, 1.0, 3.0];
        assert_eq!(detrend(&daily, &x, 2, 0.0).unwrap(), daily);
        assert_eq!(
            detrend(&daily, &x, 2, 2.0).unwrap(),
            vec![5.0, 5.0, 3.0, 3.0, -1.0, -1.0]
        );
        let series: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let x4 = [0.1, -0.4, 2.2, 0.9];
        let back = detrend(&retrend(&series, &x4, 3, 1.7).unwrap(), &x4, 3, 1.7).unwrap();
        for (a, b) in back.iter().zip(&series) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(matches!(detrend(&daily, &x, 4, 1.0), Err(Error::Shape(_))));
    }

    #[test]
    fn tilde_params_gumbel_identity() {
        let theta = GevParams::new(30.0, 1.7, 0.0).unwrap();
        for r in [1usize, 2, 92, 365] {
            let t = bootstrap_tilde_params(&theta, 0.8, 1.25, r);
            assert_eq!(t.sigma, theta.sigma);
            let lhs = t.mu + t.sigma * (r as f64).ln();
            assert!((lhs - (30.0 + 0.8 * 1.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn tilde_params_max_stability() {
        for g in [-0.4, -0.2, 0.15, 0.3] {
            let theta = GevParams::new(31.0, 1.9, g).unwrap();
            let r = 92usize;
            let tilde = bootstrap_tilde_params(&theta, 2.5, 0.4, r);
            let target = GevParams::new(31.0 + 2.5 * 0.4, 1.9, g).unwrap();
            for p in [0.01, 0.2, 0.5, 0.9, 0.999] {
                let x = target.quantile(p).unwrap();
                let lhs = gev::gev_cdf(&tilde, x).powi(r as i32);
                assert!((lhs - gev::gev_cdf(&target, x)).abs() < 1e-12, "γ={g} p={p}");
            }
        }
        let theta = GevParams::new(1.0, 2.0, -0.3).unwrap();
        let one = bootstrap_tilde_params(&theta, 3.0, 0.5, 1);
        assert_eq!(one, GevParams { mu: 2.5, sigma: 2.0, gamma: -0.3 });
    }

    #[test]
    fn symmetric_ci_examples() {
        let uniform: Vec<f64> = (0..100).map(f64::from).collect();
        let ci = symmetric_percentile_ci(&uniform, 49.5, 0.95).unwrap();
        assert_eq!(ci.eps, 47.5);
        assert!(ci.attained);
        let inside = uniform.iter().filter(|&&v| v >= ci.lo && v <= ci.hi).count();
        assert!(inside >= 95);

        let flat = vec![3.0; 20];
        let ci = symmetric_percentile_ci(&flat, 3.0, 0.9).unwrap();
        assert_eq!((ci.lo, ci.hi, ci.eps), (3.0, 3.0, 0.0));

        // symmetric sample: the level quantile of |v - center|
        let sym: Vec<f64> = (1..=20).flat_map(|i| [10.0 + i as f64, 10.0 - i as f64]).collect();
        let ci = symmetric_percentile_ci(&sym, 10.0, 0.9).unwrap();
        assert_eq!(ci.eps, 18.0);

        let far = symmetric_percentile_ci(&[0.0, 1.0], 10.0, 0.5).unwrap();
        assert!(!far.attained);
        assert_eq!((far.lo, far.hi), (0.0, 20.0));

        assert!(symmetric_percentile_ci(&[], 0.0, 0.9).is_err());
        assert!(symmetric_percentile_ci(&[1.0], 0.0, 1.0).is_err());
    }

    fn seasonal_gev(seasons: usize, r: usize, seed: u64) -> Vec<f64> {
        let theta = GevParams::new(0.0, 1.0, -0.2).unwrap();
        let tilde = bootstrap_tilde_params(&theta, 0.0, 0.0, r);
        let mut rg = rng::stream(seed, &[]);
        gev::gev_sample(&tilde, seasons * r, &mut rg)
    }

    #[test]
    fn bootstrap_validation_and_determinism() {
        let daily = seasonal_gev(30, 20, 1);
        let x: Vec<f64> = (0..30).map(|i| i as f64 / 30.0).collect();
        let small = BootstrapConfig::new(50, Scheme::Disjoint, false, 3);
        assert!(matches!(
            parametric_bootstrap(&daily, Some(&x), 20, &small),
            Err(Error::Parameter { name: "replicates", .. })
        ));
        let cfg = BootstrapConfig::new(100, Scheme::Circular, false, 3);
        let a = parametric_bootstrap(&daily, Some(&x), 20, &cfg).unwrap();
        let b = parametric_bootstrap(&daily, Some(&x), 20, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.replicates.len() + a.failures, 100);
        assert_eq!(a.season_cis.len(), 30);
        let fit = fit_trended(&daily, &x, 20, Scheme::Circular).unwrap();
        assert_eq!(a.estimate.slope, fit.slope);
        for (t, rl) in a.season_return_levels.iter().enumerate() {
            assert_eq!(*rl, fit.base.return_level(100.0) + fit.slope * x[t]);
            assert_eq!(*rl, fit.return_level(100.0, t));
        }
        let st = BootstrapConfig::new(100, Scheme::Disjoint, true, 3);
        let s = parametric_bootstrap(&daily, None, 20, &st).unwrap();
        assert!(s.replicates.iter().all(|p| p.slope == 0.0));
        assert!(parametric_bootstrap(&daily, None, 20, &cfg).is_err());
    }
}
