//! Population return levels and the Monte Carlo comparison of estimators.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{simulate_series, Latent, SimConfig};
use crate::error::{Error, Result};
use crate::pwm::{self, GevFit};
use crate::rng;

const POPULATION_STREAM: u64 = 1;
const BOOTSTRAP_STREAM: u64 = 2;
const REPLICATION_STREAM: u64 = 3;
const TRUTH_STREAM: u64 = 4;

/// Resamples used for the standard error of a population return level.
pub const POPULATION_BOOTSTRAP: usize = 200;

/// Empirical `p`-quantile with linear interpolation between order
/// statistics (`(m-1)p` convention).
pub fn empirical_quantile(values: &[f64], p: f64) -> f64 {
    let mut work = values.to_vec();
    quantile_in_place(&mut work, p)
}

fn quantile_in_place(work: &mut [f64], p: f64) -> f64 {
    let m = work.len();
    assert!(m > 0, "quantile of an empty sample");
    let h = (m - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let (_, &mut x_lo, upper) = work.select_nth_unstable_by(lo, f64::total_cmp);
    if upper.is_empty() {
        return x_lo;
    }
    let x_hi = upper.iter().copied().fold(f64::INFINITY, f64::min);
    x_lo + (h - lo as f64) * (x_hi - x_lo)
}

/// Maxima of `n_blocks` independent blocks of length `config.r`, each
/// started from the stationary law. Only the latent extreme is transformed
/// when the margin does not vary with the day, since the maximum commutes
/// with the increasing quantile map.
pub fn population_block_maxima(config: &SimConfig, n_blocks: usize) -> Result<Vec<f64>> {
    config.validate()?;
    let r = config.r;
    Ok((0..n_blocks)
        .into_par_iter()
        .map(|j| {
            let mut rng = rng::stream(config.seed, &[POPULATION_STREAM, j as u64]);
            let mut latent = Latent::new(config.model);
            if config.margin.is_seasonal() {
                (0..r)
                    .map(|t| config.margin.upper_quantile(latent.next_q(&mut rng), t))
                    .fold(f64::NEG_INFINITY, f64::max)
                    + config.shift
            } else {
                let q_min = (0..r).map(|_| latent.next_q(&mut rng)).fold(1.0, f64::min);
                config.margin.upper_quantile(q_min, 0) + config.shift
            }
        })
        .collect())
}

/// Monte Carlo approximation of a return level and its bootstrap standard
/// error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PopulationRl {
    pub t: f64,
    pub value: f64,
    pub se: f64,
}

/// Empirical `(1 - 1/T)`-quantiles of `n_blocks` simulated block maxima.
pub fn population_return_levels(config: &SimConfig, ts: &[f64], n_blocks: usize) -> Result<Vec<PopulationRl>> {
    if n_blocks < 2 {
        return Err(Error::parameter("N", "need at least two blocks"));
    }
    if let Some(&t) = ts.iter().find(|&&t| !(t > 1.0)) {
        return Err(Error::Domain {
            name: "T",
            value: t,
            reason: "return period must exceed one block",
        });
    }
    let maxima = population_block_maxima(config, n_blocks)?;
    let probs: Vec<f64> = ts.iter().map(|t| 1.0 - 1.0 / t).collect();
    let values: Vec<f64> = probs.iter().map(|&p| empirical_quantile(&maxima, p)).collect();
    let boot: Vec<Vec<f64>> = (0..POPULATION_BOOTSTRAP)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(config.seed, &[BOOTSTRAP_STREAM, b as u64]);
            let mut resample: Vec<f64> = (0..n_blocks).map(|_| maxima[rng.random_range(0..n_blocks)]).collect();
            probs.iter().map(|&p| quantile_in_place(&mut resample, p)).collect()
        })
        .collect();
    Ok(ts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let draws: Vec<f64> = boot.iter().map(|row| row[i]).collect();
            PopulationRl {
                t,
                value: values[i],
                se: std_dev(&draws),
            }
        })
        .collect())
}

pub fn population_return_level(config: &SimConfig, t: f64, n_blocks: usize) -> Result<PopulationRl> {
    Ok(population_return_levels(config, &[t], n_blocks)?[0])
}

fn std_dev(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Estimator {
    Disjoint,
    Sliding,
    /// Sliding blocks with the bias-reduced moments.
    BiasReduced,
}

impl Estimator {
    pub fn as_str(self) -> &'static str {
        match self {
            Estimator::Disjoint => "disjoint",
            Estimator::Sliding => "sliding",
            Estimator::BiasReduced => "bias-reduced",
        }
    }

    pub fn fit(self, series: &[f64], r: usize) -> Result<GevFit> {
        match self {
            Estimator::Disjoint => pwm::fit_disjoint(series, r),
            Estimator::Sliding => pwm::fit_sliding(series, r),
            Estimator::BiasReduced => pwm::fit_bias_reduced(series, r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "t", rename_all = "kebab-case")]
pub enum Target {
    Shape,
    /// `RL(T, r)` for the configured block size.
    ReturnLevel(f64),
}

impl Target {
    pub fn label(&self) -> String {
        match self {
            Target::Shape => "shape".into(),
            Target::ReturnLevel(t) => format!("rl({t})"),
        }
    }

    fn estimate(&self, fit: &GevFit) -> f64 {
        match *self {
            Target::Shape => fit.params.gamma,
            Target::ReturnLevel(t) => fit.return_level(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyOptions {
    pub reps: usize,
    /// Blocks simulated for each population return level.
    pub population_blocks: usize,
    pub estimators: Vec<Estimator>,
}

impl Default for StudyOptions {
    fn default() -> Self {
        StudyOptions {
            reps: 1000,
            population_blocks: 100_000,
            estimators: vec![Estimator::Disjoint, Estimator::Sliding],
        }
    }
}

/// Error summary of one estimator for one target under one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub config: String,
    pub estimator: Estimator,
    pub target: String,
    pub truth: f64,
    pub bias: f64,
    /// Sample variance with denominator `reps - 1`.
    pub variance: f64,
    /// Mean squared error, `bias² + (reps-1)/reps · variance`.
    pub mse: f64,
    /// `MSE(disjoint) / MSE(this estimator)`, when the disjoint estimator
    /// was part of the study.
    pub rel_eff: Option<f64>,
    /// Successful replications.
    pub reps: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McResult {
    pub rows: Vec<McRow>,
}

impl McResult {
    pub fn find(&self, config: &str, estimator: Estimator, target: &str) -> Option<&McRow> {
        self.rows
            .iter()
            .find(|r| r.config == config && r.estimator == estimator && r.target == target)
    }
}

fn truths(config: &SimConfig, targets: &[Target], population_blocks: usize) -> Result<Vec<f64>> {
    let ts: Vec<f64> = targets
        .iter()
        .filter_map(|t| match t {
            Target::ReturnLevel(t) => Some(*t),
            Target::Shape => None,
        })
        .collect();
    let truth_config = config.with_seed(rng::derive_seed(config.seed, &[TRUTH_STREAM]));
    let mut rls = if ts.is_empty() {
        Vec::new()
    } else {
        population_return_levels(&truth_config, &ts, population_blocks)?
    }
    .into_iter();
    targets
        .iter()
        .map(|t| match t {
            Target::Shape => config
                .margin
                .shape()
                .ok_or_else(|| Error::parameter("target", format!("margin {} has no known shape", config.margin.label()))),
            Target::ReturnLevel(_) => Ok(rls.next().expect("one level per return-level target").value),
        })
        .collect()
}

/// Bias, variance and MSE of each estimator for each target over `reps`
/// simulated series per configuration. Replication `i` of a configuration
/// with seed `s` simulates with the seed derived from `(s, i)`, so results
/// are reproducible and independent of the thread count. Failed fits are
/// counted and excluded.
pub fn mc_study(grid: &[SimConfig], targets: &[Target], opts: &StudyOptions) -> Result<McResult> {
    if opts.reps < 2 {
        return Err(Error::parameter("reps", "need at least two replications"));
    }
    if opts.estimators.is_empty() || targets.is_empty() {
        return Err(Error::parameter("study", "need at least one estimator and one target"));
    }
    let mut rows = Vec::new();
    for config in grid {
        config.validate()?;
        let truth = truths(config, targets, opts.population_blocks)?;
        // per replication, per estimator: estimates for every target or a failure
        let per_rep: Vec<Vec<Option<Vec<f64>>>> = (0..opts.reps)
            .into_par_iter()
            .map(|i| {
                let seed = rng::derive_seed(config.seed, &[REPLICATION_STREAM, i as u64]);
                let series = simulate_series(&config.with_seed(seed));
                opts.estimators
                    .iter()
                    .map(|est| {
                        let series = series.as_ref().ok()?;
                        let fit = est.fit(series, config.r).ok()?;
                        let values: Vec<f64> = targets.iter().map(|t| t.estimate(&fit)).collect();
                        values.iter().all(|v| v.is_finite()).then_some(values)
                    })
                    .collect()
            })
            .collect();

        let label = config.label();
        let mut block = Vec::new();
        for (e, &est) in opts.estimators.iter().enumerate() {
            for (k, target) in targets.iter().enumerate() {
                let errors: Vec<f64> = per_rep
                    .iter()
                    .filter_map(|rep| rep[e].as_ref().map(|v| v[k] - truth[k]))
                    .collect();
                let (bias, variance, mse) = error_summary(&errors);
                block.push(McRow {
                    config: label.clone(),
                    estimator: est,
                    target: target.label(),
                    truth: truth[k],
                    bias,
                    variance,
                    mse,
                    rel_eff: None,
                    reps: errors.len(),
                    failures: opts.reps - errors.len(),
                });
            }
        }
        let reference: Vec<Option<f64>> = targets
            .iter()
            .map(|t| {
                block
                    .iter()
                    .find(|r| r.estimator == Estimator::Disjoint && r.target == t.label())
                    .map(|r| r.mse)
            })
            .collect();
        for row in &mut block {
            let k = targets.iter().position(|t| t.label() == row.target).expect("target present");
            row.rel_eff = reference[k].map(|m| m / row.mse);
        }
        rows.extend(block);
    }
    Ok(McResult { rows })
}

/// `(mean, variance with denominator R-1, mean square)`.
fn error_summary(errors: &[f64]) -> (f64, f64, f64) {
    let n = errors.len() as f64;
    if errors.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let bias = errors.iter().sum::<f64>() / n;
    let variance = if errors.len() > 1 {
        errors.iter().map(|e| (e - bias).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        f64::NAN
    };
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / n;
    (bias, variance, mse)
}

#[cfg(test)]
mod tests {
    use super::super::{Dependence, Margin, SamplingScheme};
    use super::*;

    fn iid_gpd(gamma: f64, seasons: usize) -> SimConfig {
        SimConfig {
            model: Dependence::Iid,
            margin: Margin::Gpd(gamma),
            shift: 0.0,
            scheme: SamplingScheme::S2,
            n: 90 * seasons,
            r: 90,
            seed: 2024,
        }
    }

    #[test]
    fn quantile_convention() {
        let v: Vec<f64> = (0..100).map(f64::from).collect();
        assert_eq!(empirical_quantile(&v, 0.0), 0.0);
        assert_eq!(empirical_quantile(&v, 1.0), 99.0);
        assert!((empirical_quantile(&v, 0.99) - 98.01).abs() < 1e-12);
        assert_eq!(empirical_quantile(&[3.0], 0.5), 3.0);
    }

    #[test]
    fn population_level_iid_exponential() {
        let rl = population_return_level(&iid_gpd(0.0, 1), 100.0, 200_000).unwrap();
        // exact value for maxima of 90 exponentials
        let exact = -(-(0.99f64.powf(1.0 / 90.0))).ln_1p();
        assert!((rl.value - exact).abs() < 4.0 * rl.se + 1e-3, "{rl:?} vs {exact}");
        assert!(rl.se > 0.0 && rl.se < 0.05);
    }

    #[test]
    fn study_is_reproducible_and_consistent() {
        let opts = StudyOptions {
            reps: 50,
            population_blocks: 5000,
            estimators: vec![Estimator::Disjoint, Estimator::Sliding],
        };
        let grid = [iid_gpd(-0.2, 20)];
        let targets = [Target::Shape, Target::ReturnLevel(50.0)];
        let a = mc_study(&grid, &targets, &opts).unwrap();
        let b = mc_study(&grid, &targets, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 4);
        for row in &a.rows {
            let r = row.reps as f64;
            let rhs = row.bias * row.bias + (r - 1.0) / r * row.variance;
            assert!((row.mse - rhs).abs() <= 1e-10 * row.mse.abs().max(1e-300));
            assert_eq!(row.reps + row.failures, 50);
        }
        let d = a.find(&grid[0].label(), Estimator::Disjoint, "shape").unwrap();
        assert_eq!(d.rel_eff, Some(1.0));
        assert_eq!(d.truth, -0.2);
    }

    #[test]
    fn two_replications_give_finite_variance() {
        let opts = StudyOptions {
            reps: 2,
            population_blocks: 100,
            estimators: vec![Estimator::Disjoint],
        };
        let res = mc_study(&[iid_gpd(0.0, 10)], &[Target::Shape], &opts).unwrap();
        assert!(res.rows[0].variance.is_finite());
        let bad = StudyOptions { reps: 1, ..opts };
        assert!(mc_study(&[iid_gpd(0.0, 10)], &[Target::Shape], &bad).is_err());
    }

    #[test]
    fn seasonal_margin_has_no_shape_target() {
        let mut c = iid_gpd(0.0, 10);
        c.margin = Margin::SteinSeasonal;
        let opts = StudyOptions {
            reps: 2,
            population_blocks: 100,
            estimators: vec![Estimator::Disjoint],
        };
        assert!(mc_study(&[c], &[Target::Shape], &opts).is_err());
    }
}
