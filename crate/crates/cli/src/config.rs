//! Key-value study configuration files.
//!
//! One `key = value` pair per line; `#` starts a comment. Comma-separated
//! values of `model`, `margin`, `scheme` and `seasons` span a grid over
//! their Cartesian product.
//!
//! ```text
//! model = ar:0.5, iid
//! margin = gpd:-0.2
//! scheme = s2
//! seasons = 10, 50
//! r = 90
//! reps = 1000
//! targets = shape, rl:100
//! estimators = disjoint, sliding
//! ```

use std::collections::BTreeMap;

use blockmax::simgen::{Dependence, Estimator, Margin, SamplingScheme, SimConfig, StudyOptions, Target};
use serde::Serialize;

use crate::error::{CliError, CliResult};

const KEYS: [&str; 11] = [
    "model",
    "margin",
    "shift",
    "scheme",
    "seasons",
    "r",
    "seed",
    "reps",
    "targets",
    "estimators",
    "population_blocks",
];

fn field_error(key: &str, value: &str, expected: &str) -> CliError {
    CliError::usage(format!("config field {key}: invalid value {value:?}, expected {expected}"))
}

pub fn parse_pairs(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(CliError::usage(format!(
                "config line {}: unknown field {key:?}, known fields: {}",
                i + 1,
                KEYS.join(", ")
            )));
        }
        out.insert(key.to_string(), value.trim().to_string());
    }
    Ok(out)
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn tagged<'a>(value: &'a str) -> (&'a str, Option<&'a str>) {
    match value.split_once(':') {
        Some((tag, p)) => (tag.trim(), Some(p.trim())),
        None => (value.trim(), None),
    }
}

fn number(key: &str, value: &str) -> CliResult<f64> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| field_error(key, value, "a number"))
}

/// Counts accept scientific notation such as `1e5`.
pub fn count(key: &str, value: &str) -> CliResult<usize> {
    let v = number(key, value)?;
    if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 * 65536.0 {
        return Err(field_error(key, value, "a nonnegative integer"));
    }
    Ok(v as usize)
}

pub fn parse_model(value: &str) -> CliResult<Dependence> {
    const EXPECTED: &str = "iid, ar:PHI, car:PHI or armax:B";
    let (tag, p) = tagged(value);
    let param = |p: Option<&str>| p.ok_or_else(|| field_error("model", value, EXPECTED)).and_then(|p| number("model", p));
    let model = match tag {
        "iid" if p.is_none() => Dependence::Iid,
        "ar" => Dependence::Ar(param(p)?),
        "car" => Dependence::Car(param(p)?),
        "armax" => Dependence::Armax(param(p)?),
        _ => return Err(field_error("model", value, EXPECTED)),
    };
    model.validate()?;
    Ok(model)
}

pub fn parse_margin(value: &str) -> CliResult<Margin> {
    const EXPECTED: &str = "gpd:G, hw:G, rhw:G, hw0, stein-seasonal or stein-stationary";
    let (tag, p) = tagged(value);
    let param = |p: Option<&str>| p.ok_or_else(|| field_error("margin", value, EXPECTED)).and_then(|p| number("margin", p));
    let margin = match tag {
        "gpd" => Margin::Gpd(param(p)?),
        "hw" => Margin::Hw(param(p)?),
        "rhw" => Margin::Rhw(param(p)?),
        "hw0" if p.is_none() => Margin::Hw0,
        "stein-seasonal" if p.is_none() => Margin::SteinSeasonal,
        "stein-stationary" if p.is_none() => Margin::SteinStationary,
        _ => return Err(field_error("margin", value, EXPECTED)),
    };
    margin.validate()?;
    Ok(margin)
}

pub fn parse_scheme(value: &str) -> CliResult<SamplingScheme> {
    match value.to_ascii_lowercase().as_str() {
        "s1" => Ok(SamplingScheme::S1),
        "s2" => Ok(SamplingScheme::S2),
        _ => Err(field_error("scheme", value, "s1 or s2")),
    }
}

pub fn parse_target(value: &str) -> CliResult<Target> {
    match tagged(value) {
        ("shape", None) => Ok(Target::Shape),
        ("rl", Some(t)) => {
            let t = number("targets", t)?;
            if t > 1.0 {
                Ok(Target::ReturnLevel(t))
            } else {
                Err(field_error("targets", value, "a return period above 1"))
            }
        }
        _ => Err(field_error("targets", value, "shape or rl:T")),
    }
}

pub fn parse_estimator(value: &str) -> CliResult<Estimator> {
    match value {
        "disjoint" => Ok(Estimator::Disjoint),
        "sliding" => Ok(Estimator::Sliding),
        "bias-reduced" => Ok(Estimator::BiasReduced),
        _ => Err(field_error("estimators", value, "disjoint, sliding or bias-reduced")),
    }
}

/// A fully resolved Monte Carlo study.
#[derive(Debug, Clone, Serialize)]
pub struct StudySpec {
    pub grid: Vec<SimConfig>,
    pub targets: Vec<Target>,
    pub options: StudyOptions,
    pub seed: u64,
}

/// Builds a study from configuration pairs; `overrides` (from flags) take
/// precedence over the file.
pub fn study_from_pairs(mut pairs: BTreeMap<String, String>, overrides: &[(&str, String)]) -> CliResult<StudySpec> {
    for (k, v) in overrides {
        pairs.insert((*k).to_string(), v.clone());
    }
    let get = |k: &str, default: &str| pairs.get(k).cloned().unwrap_or_else(|| default.to_string());
    let models = list(&get("model", "iid")).map(parse_model).collect::<CliResult<Vec<_>>>()?;
    let margins = list(&get("margin", "gpd:0")).map(parse_margin).collect::<CliResult<Vec<_>>>()?;
    let schemes = list(&get("scheme", "s2")).map(parse_scheme).collect::<CliResult<Vec<_>>>()?;
    let seasons = list(&get("seasons", "50")).map(|v| count("seasons", v)).collect::<CliResult<Vec<_>>>()?;
    let r = count("r", &get("r", "90"))?;
    if r == 0 {
        return Err(field_error("r", "0", "a block size of at least 1"));
    }
    let shift = number("shift", &get("shift", "0"))?;
    let seed = get("seed", "1")
        .parse::<u64>()
        .map_err(|_| field_error("seed", &get("seed", "1"), "an unsigned 64-bit integer"))?;
    let reps = count("reps", &get("reps", "1000"))?;
    if reps < 2 {
        return Err(field_error("reps", &reps.to_string(), "at least 2"));
    }
    let population_blocks = count("population_blocks", &get("population_blocks", "100000"))?;
    let targets = list(&get("targets", "shape")).map(parse_target).collect::<CliResult<Vec<_>>>()?;
    let estimators = list(&get("estimators", "disjoint, sliding"))
        .map(parse_estimator)
        .collect::<CliResult<Vec<_>>>()?;
    if models.is_empty() || margins.is_empty() || schemes.is_empty() || seasons.is_empty() {
        return Err(CliError::usage("config: model, margin, scheme and seasons need at least one value"));
    }
    if targets.is_empty() || estimators.is_empty() {
        return Err(CliError::usage("config: targets and estimators need at least one value"));
    }
    let mut grid = Vec::new();
    let mut index = 0u64;
    for &model in &models {
        for &margin in &margins {
            for &scheme in &schemes {
                for &s in &seasons {
                    if s == 0 {
                        return Err(field_error("seasons", "0", "at least one season"));
                    }
                    grid.push(SimConfig {
                        model,
                        margin,
                        shift,
                        scheme,
                        n: s * r,
                        r,
                        seed: blockmax::rng::derive_seed(seed, &[index]),
                    });
                    index += 1;
                }
            }
        }
    }
    Ok(StudySpec {
        grid,
        targets,
        options: StudyOptions {
            reps,
            population_blocks,
            estimators,
        },
        seed,
    })
}
