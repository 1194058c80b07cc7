//! `blockmax simulate`: Monte Carlo studies from a config file or preset.

use std::path::Path;

use blockmax::simgen::{self, Dependence, Margin, McResult, SamplingScheme, SimConfig};
use serde::Serialize;

use crate::config::{self, StudySpec};
use crate::error::{CliError, CliResult};
use crate::io::{num, Sink};

pub const PRESETS: [&str; 2] = ["table1", "figure1"];

const TABLE1_AR: [f64; 7] = [-0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75];
const TABLE1_SHAPES: [f64; 5] = [-0.4, -0.2, 0.0, 0.2, 0.4];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct SimulateArgs<'a> {
    pub config: Option<&'a Path>,
    pub preset: Option<&'a str>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub population_blocks: Option<usize>,
    pub format: Format,
}

#[derive(Debug, Serialize)]
struct PopulationRow {
    ar: f64,
    gamma: f64,
    t: f64,
    value: f64,
    se: f64,
}

/// Population return levels `RL(50, 90)` and `RL(100, 90)` on the AR × shape grid.
fn table1(seed: u64, blocks: usize, format: Format, sink: &Sink) -> CliResult<()> {
    let mut rows = Vec::new();
    for (i, &phi) in TABLE1_AR.iter().enumerate() {
        for (j, &gamma) in TABLE1_SHAPES.iter().enumerate() {
            let config = SimConfig {
                model: Dependence::Ar(phi),
                margin: Margin::Gpd(gamma),
                shift: 0.0,
                scheme: SamplingScheme::S1,
                n: 90,
                r: 90,
                seed: blockmax::rng::derive_seed(seed, &[i as u64, j as u64]),
            };
            for rl in simgen::population_return_levels(&config, &[50.0, 100.0], blocks)? {
                rows.push(PopulationRow {
                    ar: phi,
                    gamma,
                    t: rl.t,
                    value: rl.value,
                    se: rl.se,
                });
            }
        }
    }
    match format {
        Format::Json => sink.write_json(&rows),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["ar", "gamma", "t", "value", "se"])?;
            for r in &rows {
                w.write_record([num(r.ar), num(r.gamma), num(r.t), num(r.value), num(r.se)])?;
            }
            sink.write_text(&finish(w)?)
        }
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    Ok(String::from_utf8(w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?).expect("CSV output is UTF-8"))
}

/// Relative efficiency curves for AR(0.5) with GPD margins, both sampling
/// schemes, 10 to 100 seasons of length 90.
fn figure1_text(reps: usize) -> String {
    format!(
        "model = ar:0.5\nmargin = gpd:-0.4, gpd:-0.2, gpd:0, gpd:0.2, gpd:0.4\n\
         scheme = s1, s2\nseasons = 10, 20, 30, 40, 50, 75, 100\nr = 90\nreps = {reps}\n\
         targets = shape, rl:50, rl:100\nestimators = disjoint, sliding\n"
    )
}

pub fn write_study(result: &McResult, format: Format, sink: &Sink) -> CliResult<()> {
    match format {
        Format::Json => sink.write_json(result),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record([
                "config", "estimator", "target", "truth", "bias", "variance", "mse", "rel_eff", "reps", "failures",
            ])?;
            for r in &result.rows {
                w.write_record([
                    r.config.clone(),
                    r.estimator.as_str().to_string(),
                    r.target.clone(),
                    num(r.truth),
                    num(r.bias),
                    num(r.variance),
                    num(r.mse),
                    r.rel_eff.map(num).unwrap_or_default(),
                    r.reps.to_string(),
                    r.failures.to_string(),
                ])?;
            }
            sink.write_text(&finish(w)?)
        }
    }
}

fn overrides(args: &SimulateArgs<'_>) -> Vec<(&'static str, String)> {
    let mut o = Vec::new();
    if let Some(r) = args.reps {
        o.push(("reps", r.to_string()));
    }
    if let Some(s) = args.seed {
        o.push(("seed", s.to_string()));
    }
    if let Some(n) = args.population_blocks {
        o.push(("population_blocks", n.to_string()));
    }
    o
}

fn run_spec(spec: &StudySpec, format: Format, sink: &Sink) -> CliResult<serde_json::Value> {
    let result = simgen::mc_study(&spec.grid, &spec.targets, &spec.options)?;
    write_study(&result, format, sink)?;
    Ok(serde_json::to_value(spec)?)
}

pub fn run(args: &SimulateArgs<'_>, sink: &Sink) -> CliResult<serde_json::Value> {
    match (args.preset, args.config) {
        (Some(_), Some(_)) => Err(CliError::usage("use either --preset or --config, not both")),
        (None, None) => Err(CliError::usage(format!(
            "need --config FILE or --preset NAME (presets: {})",
            PRESETS.join(", ")
        ))),
        (Some("table1"), None) => {
            let seed = args.seed.unwrap_or(1);
            let blocks = args.population_blocks.unwrap_or(100_000);
            if blocks < 2 {
                return Err(CliError::usage("--N must be at least 2"));
            }
            table1(seed, blocks, args.format, sink)?;
            Ok(serde_json::json!({ "preset": "table1", "population_blocks": blocks, "seed": seed }))
        }
        (Some("figure1"), None) => {
            let pairs = config::parse_pairs(&figure1_text(200))?;
            let spec = config::study_from_pairs(pairs, &overrides(args))?;
            run_spec(&spec, args.format, sink)
        }
        (Some(other), None) => Err(CliError::usage(format!(
            "unknown preset {other:?}; available presets: {}",
            PRESETS.join(", ")
        ))),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let spec = config::study_from_pairs(config::parse_pairs(&text)?, &overrides(args))?;
            run_spec(&spec, args.format, sink)
        }
    }
}
