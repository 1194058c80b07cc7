//! `blockmax bootstrap`: trended-location parametric bootstrap.

use std::collections::BTreeMap;
use std::path::Path;

use blockmax::blocks::Scheme;
use blockmax::trend::{self, BootstrapConfig};

use crate::error::{CliError, CliResult};
use crate::io::{self, Sink, Table};

pub struct BootstrapArgs<'a> {
    pub daily: &'a Path,
    pub covariate: Option<&'a Path>,
    pub block_size: Option<usize>,
    pub replicates: usize,
    pub mode: Scheme,
    pub stationary: bool,
    pub seed: u64,
    pub rl: f64,
    pub level: f64,
    pub keep_replicates: bool,
}

fn index(table: &Table, line: u64, v: f64, what: &str) -> CliResult<i64> {
    if v.fract() != 0.0 || !v.is_finite() {
        return Err(CliError::Input {
            path: table.path.clone(),
            line,
            reason: format!("{what} {v} is not an integer"),
        });
    }
    Ok(v as i64)
}

/// Daily values grouped by season and ordered by day, with the season
/// labels in ascending order.
pub fn read_daily(path: &Path, block_size: Option<usize>) -> CliResult<(Vec<i64>, Vec<f64>, usize)> {
    let table = io::read_table(path)?;
    let (s, d, v) = (
        table.require("season_index")?,
        table.require("day_index")?,
        table.require("value")?,
    );
    let mut seasons: BTreeMap<i64, Vec<(i64, f64)>> = BTreeMap::new();
    for (line, row) in &table.rows {
        let season = index(&table, *line, row[s], "season_index")?;
        let day = index(&table, *line, row[d], "day_index")?;
        seasons.entry(season).or_default().push((day, row[v]));
    }
    let r = match block_size {
        Some(r) => r,
        None => seasons.values().next().map_or(0, Vec::len),
    };
    if r == 0 {
        return Err(CliError::usage(format!("{}: no observations", table.path)));
    }
    let mut daily = Vec::with_capacity(r * seasons.len());
    for (season, mut days) in seasons.iter().map(|(k, v)| (*k, v.clone())) {
        if days.len() != r {
            return Err(CliError::usage(format!(
                "{}: season {season} has {} days, expected {r}",
                table.path,
                days.len()
            )));
        }
        days.sort_by_key(|&(day, _)| day);
        if days.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(CliError::usage(format!("{}: season {season} repeats a day_index", table.path)));
        }
        daily.extend(days.iter().map(|&(_, v)| v));
    }
    Ok((seasons.keys().copied().collect(), daily, r))
}

/// Covariate values in the order of `seasons`.
pub fn read_covariate(path: &Path, seasons: &[i64]) -> CliResult<Vec<f64>> {
    let table = io::read_table(path)?;
    let (s, x) = (table.require("season_index")?, table.require("x")?);
    let mut by_season = BTreeMap::new();
    for (line, row) in &table.rows {
        let season = index(&table, *line, row[s], "season_index")?;
        if by_season.insert(season, row[x]).is_some() {
            return Err(CliError::Input {
                path: table.path.clone(),
                line: *line,
                reason: format!("season {season} listed twice"),
            });
        }
    }
    seasons
        .iter()
        .map(|k| {
            by_season
                .get(k)
                .copied()
                .ok_or_else(|| CliError::usage(format!("{}: no covariate for season {k}", table.path)))
        })
        .collect()
}

pub fn run(args: &BootstrapArgs<'_>, sink: &Sink) -> CliResult<serde_json::Value> {
    let (seasons, daily, r) = read_daily(args.daily, args.block_size)?;
    let covariate = args.covariate.map(|p| read_covariate(p, &seasons)).transpose()?;
    let config = BootstrapConfig {
        replicates: args.replicates,
        mode: args.mode,
        stationary: args.stationary,
        seed: args.seed,
        return_period: args.rl,
        level: args.level,
    };
    let result = trend::parametric_bootstrap(&daily, covariate.as_deref(), r, &config)?;
    let mut value = serde_json::to_value(&result)?;
    if !args.keep_replicates {
        if let Some(obj) = value.as_object_mut() {
            obj.remove("replicates");
        }
    }
    if let Some(obj) = value.as_object_mut() {
        obj.insert("seasons".into(), serde_json::to_value(&seasons)?);
        obj.insert("block_size".into(), r.into());
    }
    sink.write_json(&value)?;
    Ok(serde_json::json!({
        "daily": args.daily.display().to_string(),
        "covariate": args.covariate.map(|p| p.display().to_string()),
        "block_size": r,
        "bootstrap": config,
    }))
}
