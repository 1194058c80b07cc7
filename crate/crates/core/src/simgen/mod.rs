//! Synthetic daily series: a latent stationary process with known margin,
//! quantile-transformed to the target margin, observed either as one series
//! or as independent seasons.

mod margins;
mod study;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::special::normal_upper_tail;

pub use margins::{hall_welsh_upper_quantile, stein_location, Margin, STEIN_DAYS, STEIN_FIRST_DAY, stein_mean_location};
pub use study::{
    empirical_quantile, mc_study, population_return_level, population_return_levels, Estimator, McResult,
    McRow, PopulationRl, StudyOptions, Target,
};

/// Serial dependence of the latent process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "param", rename_all = "lowercase")]
pub enum Dependence {
    Iid,
    /// Gaussian AR(1), `|φ| < 1`.
    Ar(f64),
    /// AR(1) with standard Cauchy innovations, `φ ∈ (0, 1)`.
    Car(f64),
    /// Fréchet ARMAX(1), `b ∈ [0, 1)`.
    Armax(f64),
}

impl Dependence {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: &str| Err(Error::parameter("model", reason.to_string()));
        match *self {
            Dependence::Iid => Ok(()),
            Dependence::Ar(phi) if !(phi.abs() < 1.0) => bad("AR parameter must satisfy |phi| < 1"),
            Dependence::Car(phi) if !(phi > 0.0 && phi < 1.0) => {
                bad("CAR parameter must lie in (0, 1)")
            }
            Dependence::Armax(b) if !(b >= 0.0 && b < 1.0) => bad("ARMAX parameter must lie in [0, 1)"),
            _ => Ok(()),
        }
    }

    pub fn label(&self) -> String {
        match self {
            Dependence::Iid => "iid".into(),
            Dependence::Ar(p) => format!("ar({p})"),
            Dependence::Car(p) => format!("car({p})"),
            Dependence::Armax(b) => format!("armax({b})"),
        }
    }
}

/// One long stationary series (S1) or concatenated independent seasons of
/// length `r` (S2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SamplingScheme {
    S1,
    S2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub model: Dependence,
    pub margin: Margin,
    /// Added to every simulated value.
    pub shift: f64,
    pub scheme: SamplingScheme,
    pub n: usize,
    pub r: usize,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        self.margin.validate()?;
        if self.r == 0 {
            return Err(Error::parameter("r", "block size must be at least 1"));
        }
        if !self.shift.is_finite() {
            return Err(Error::parameter("shift", "must be finite"));
        }
        Ok(())
    }

    pub fn label(&self) -> String {
        format!(
            "{}/{}/{:?}/n={}/r={}",
            self.model.label(),
            self.margin.label(),
            self.scheme,
            self.n,
            self.r
        )
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SimConfig { seed, ..*self }
    }
}

/// Latent process emitting upper-tail probabilities `q_t = 1 - F_Y(Y_t)`,
/// which keep full precision in the upper tail of the target margin.
pub(crate) struct Latent {
    model: Dependence,
    y: Option<f64>,
}

impl Latent {
    pub(crate) fn new(model: Dependence) -> Self {
        Latent { model, y: None }
    }

    pub(crate) fn next_q<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let q = match self.model {
            Dependence::Iid => rng.sample(Open01),
            Dependence::Ar(phi) => {
                let sd = 1.0 / (1.0 - phi * phi).sqrt();
                let eps: f64 = StandardNormal.sample(rng);
                let y = match self.y {
                    None => sd * eps,
                    Some(prev) => phi * prev + eps,
                };
                self.y = Some(y);
                normal_upper_tail(y / sd)
            }
            Dependence::Car(phi) => {
                let scale = 1.0 / (1.0 - phi);
                let eps = Cauchy::new(0.0, 1.0).expect("unit Cauchy").sample(rng);
                let y = match self.y {
                    None => scale * eps,
                    Some(prev) => phi * prev + eps,
                };
                self.y = Some(y);
                scale.atan2(y) / std::f64::consts::PI
            }
            Dependence::Armax(b) => {
                let u: f64 = rng.sample(Open01);
                let z = -1.0 / u.ln();
                let y = match self.y {
                    None => z,
                    Some(prev) => (b * prev).max((1.0 - b) * z),
                };
                self.y = Some(y);
                -(-1.0 / y).exp_m1()
            }
        };
        q.max(f64::MIN_POSITIVE)
    }
}

/// Tag of the season streams below a configuration seed.
const SEASON_STREAM: u64 = 0;

fn fill_season<R: Rng + ?Sized>(config: &SimConfig, len: usize, rng: &mut R, out: &mut Vec<f64>) {
    let mut latent = Latent::new(config.model);
    for t in 0..len {
        let q = latent.next_q(rng);
        out.push(config.margin.upper_quantile(q, t) + config.shift);
    }
}

/// Simulates one realisation of the configured series. Day `t` of a season
/// is `t mod r` under S2 and `t mod 90` under S1 for the season-dependent
/// margin.
pub fn simulate_series(config: &SimConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let mut out = Vec::with_capacity(config.n);
    match config.scheme {
        SamplingScheme::S1 => {
            let mut rng = rng::stream(config.seed, &[SEASON_STREAM, 0]);
            fill_season(config, config.n, &mut rng, &mut out);
        }
        SamplingScheme::S2 => {
            let seasons = config.n.div_ceil(config.r);
            for j in 0..seasons {
                let mut rng = rng::stream(config.seed, &[SEASON_STREAM, j as u64]);
                let len = config.r.min(config.n - j * config.r);
                fill_season(config, len, &mut rng, &mut out);
            }
        }
    }
    Ok(out)
}

/// Seasonal temperature series in °C: S2 seasons of 90 days whose daily
/// margin varies along the season.
pub fn stein_seasonal_series(model: Dependence, seasons: usize, seed: u64) -> Result<Vec<f64>> {
    simulate_series(&SimConfig {
        model,
        margin: Margin::SteinSeasonal,
        shift: 0.0,
        scheme: SamplingScheme::S2,
        n: seasons * STEIN_DAYS,
        r: STEIN_DAYS,
        seed,
    })
}
