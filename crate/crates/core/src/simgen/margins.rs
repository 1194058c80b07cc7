//! Target margins, parametrised by the upper-tail probability `q = 1 - u`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gev::gpd_upper_quantile;

/// First day of the simulated summer season (day of year).
pub const STEIN_FIRST_DAY: usize = 152;
/// Length of the simulated summer season.
pub const STEIN_DAYS: usize = 90;
const STEIN_SHAPE: f64 = -0.2;

fn stein_k() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| 7e7f64.powf(0.2))
}

/// Daily GPD location (°F) on day `day_in_season` of the summer season:
/// `u_i - (7·10⁷)^{1/5}` with `u_i = 111 - (i - 200)²/400`.
pub fn stein_location(day_in_season: usize) -> f64 {
    let i = (STEIN_FIRST_DAY + day_in_season % STEIN_DAYS) as f64;
    111.0 - (i - 200.0).powi(2) / 400.0 - stein_k()
}

/// Mean of the daily locations over the season (≈ 72.21 °F).
pub fn stein_mean_location() -> f64 {
    static MEAN: OnceLock<f64> = OnceLock::new();
    *MEAN.get_or_init(|| (0..STEIN_DAYS).map(stein_location).sum::<f64>() / STEIN_DAYS as f64)
}

/// Marginal laws of the simulated observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "gamma", rename_all = "lowercase")]
pub enum Margin {
    /// Standard GPD(0, 1, γ).
    Gpd(f64),
    /// Hall–Welsh law with `γ > 0`, supported on `[1, ∞)`.
    Hw(f64),
    /// Law of `-1/Z` for `Z` Hall–Welsh with shape `|γ|`, `γ < 0`.
    Rhw(f64),
    /// The light-tailed member with quantile `log(1/q)(1 + q^{1/2})`.
    Hw0,
    /// Day-dependent GPD temperatures in °C.
    SteinSeasonal,
    /// The season-averaged counterpart of [`Margin::SteinSeasonal`].
    SteinStationary,
}

/// Solves `q = z²(1 + z)/2` for `z = x^{-1/(2γ)} ∈ (0, 1]` and returns the
/// Hall–Welsh point `x` with upper-tail probability `q`.
pub fn hall_welsh_upper_quantile(gamma: f64, q: f64) -> f64 {
    let target = 2.0 * q;
    // the cubic is convex and increasing on z > 0; Newton from the right of
    // the root decreases monotonically
    let mut z = target.sqrt().min(1.0);
    for _ in 0..100 {
        let f = z * z * (z + 1.0) - target;
        let step = f / (z * (3.0 * z + 2.0));
        z -= step;
        if step.abs() <= 1e-16 * z {
            break;
        }
    }
    z.powf(-2.0 * gamma)
}

impl Margin {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Margin::Gpd(g) if !g.is_finite() => Err(Error::parameter("margin", "GPD shape must be finite")),
            Margin::Hw(g) if !(g > 0.0 && g.is_finite()) => {
                Err(Error::parameter("margin", "HW shape must be positive"))
            }
            Margin::Rhw(g) if !(g < 0.0 && g.is_finite()) => {
                Err(Error::parameter("margin", "RHW shape must be negative"))
            }
            _ => Ok(()),
        }
    }

    /// Quantile at upper-tail probability `q`; `day` is the position within
    /// the season and only matters for the seasonal margin.
    pub fn upper_quantile(&self, q: f64, day: usize) -> f64 {
        match *self {
            Margin::Gpd(g) => gpd_upper_quantile(g, q),
            Margin::Hw(g) => hall_welsh_upper_quantile(g, q),
            Margin::Rhw(g) => -1.0 / hall_welsh_upper_quantile(-g, q),
            Margin::Hw0 => -q.ln() * (1.0 + q.sqrt()),
            Margin::SteinSeasonal => stein_celsius(stein_location(day), q),
            Margin::SteinStationary => stein_celsius(stein_mean_location(), q),
        }
    }

    /// Whether the quantile depends on the day within the season.
    pub fn is_seasonal(&self) -> bool {
        matches!(self, Margin::SteinSeasonal)
    }

    /// Extreme value index of the margin, when known in closed form.
    pub fn shape(&self) -> Option<f64> {
        match *self {
            Margin::Gpd(g) | Margin::Hw(g) | Margin::Rhw(g) => Some(g),
            Margin::Hw0 => Some(0.0),
            Margin::SteinStationary => Some(STEIN_SHAPE),
            Margin::SteinSeasonal => None,
        }
    }

    pub fn label(&self) -> String {
        match self {
            Margin::Gpd(g) => format!("gpd({g})"),
            Margin::Hw(g) => format!("hw({g})"),
            Margin::Rhw(g) => format!("rhw({g})"),
            Margin::Hw0 => "hw0".into(),
            Margin::SteinSeasonal => "stein-seasonal".into(),
            Margin::SteinStationary => "stein-stationary".into(),
        }
    }
}

fn stein_celsius(location: f64, q: f64) -> f64 {
    let k = stein_k();
    let fahrenheit = location + k / 5.0 * gpd_upper_quantile(STEIN_SHAPE, q);
    (fahrenheit - 32.0) * 5.0 / 9.0
}
