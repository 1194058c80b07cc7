//! `blockmax fit`: PWM fit of block maxima with return-level intervals.

use std::path::Path;

use blockmax::asympt;
use blockmax::blocks::Scheme;
use blockmax::gev::{GevParams, PwmTriple};
use blockmax::pwm::{self, GevFit};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::io::{self, num, Sink, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    /// Aligned human-readable table.
    Table,
}

#[derive(Debug, Serialize)]
pub struct ReturnLevelRow {
    pub t: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub scheme: Scheme,
    pub block_size: usize,
    pub series_length: usize,
    pub level: f64,
    pub params: GevParams,
    pub pwm: PwmTriple,
    pub return_levels: Vec<ReturnLevelRow>,
}

/// The numeric column named `column`, or the only column of a one-column
/// file.
pub fn series_column(table: &Table, column: &str) -> CliResult<Vec<f64>> {
    let idx = match table.column(column) {
        Some(i) => i,
        None if table.header.len() == 1 => 0,
        None => table.require(column)?,
    };
    table
        .rows
        .iter()
        .map(|(line, row)| {
            row.get(idx).copied().ok_or_else(|| CliError::Input {
                path: table.path.clone(),
                line: *line,
                reason: format!("missing field {column:?}"),
            })
        })
        .collect()
}

pub fn report(fit: &GevFit, rl: &[f64], level: f64) -> CliResult<FitReport> {
    let return_levels = rl
        .iter()
        .map(|&t| {
            let (lower, upper) = asympt::rl_confidence_interval(fit, t, level)?;
            Ok(ReturnLevelRow {
                t,
                estimate: fit.return_level(t),
                lower,
                upper,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(FitReport {
        scheme: fit.scheme,
        block_size: fit.r,
        series_length: fit.n,
        level,
        params: fit.params,
        pwm: fit.pwm,
        return_levels,
    })
}

fn csv_text(rep: &FitReport) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["quantity", "t", "estimate", "lower", "upper"])?;
    let scalars = [
        ("location", rep.params.mu),
        ("scale", rep.params.sigma),
        ("shape", rep.params.gamma),
        ("beta0", rep.pwm.beta0),
        ("beta1", rep.pwm.beta1),
        ("beta2", rep.pwm.beta2),
    ];
    for (name, v) in scalars {
        w.write_record([name, "", &num(v), "", ""])?;
    }
    for row in &rep.return_levels {
        w.write_record(["return_level", &num(row.t), &num(row.estimate), &num(row.lower), &num(row.upper)])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?).expect("CSV output is UTF-8"))
}

fn table_text(rep: &FitReport) -> String {
    let mut s = format!(
        "scheme {}, block size {}, series length {}\n\
         location {:>12.5}\nscale    {:>12.5}\nshape    {:>12.5}\n",
        rep.scheme, rep.block_size, rep.series_length, rep.params.mu, rep.params.sigma, rep.params.gamma
    );
    if !rep.return_levels.is_empty() {
        s.push_str(&format!(
            "\n{:>10} {:>12} {:>12} {:>12}   ({:.0}% interval)\n",
            "T",
            "RL",
            "lower",
            "upper",
            100.0 * rep.level
        ));
        for row in &rep.return_levels {
            s.push_str(&format!(
                "{:>10.4} {:>12.5} {:>12.5} {:>12.5}\n",
                row.t, row.estimate, row.lower, row.upper
            ));
        }
    }
    s
}

pub struct FitArgs<'a> {
    pub input: &'a Path,
    pub column: &'a str,
    pub block_size: usize,
    pub scheme: Scheme,
    pub rl: &'a [f64],
    pub level: f64,
    pub format: Format,
}

pub fn run(args: &FitArgs<'_>, sink: &Sink) -> CliResult<serde_json::Value> {
    if args.block_size == 0 {
        return Err(CliError::usage("--block-size must be at least 1"));
    }
    let table = io::read_table(args.input)?;
    let series = series_column(&table, args.column)?;
    let fit = pwm::fit_scheme(&series, args.block_size, args.scheme)?;
    let rep = report(&fit, args.rl, args.level)?;
    match args.format {
        Format::Json => sink.write_json(&rep)?,
        Format::Csv => sink.write_text(&csv_text(&rep)?)?,
        Format::Table => sink.write_text(&table_text(&rep))?,
    }
    Ok(serde_json::json!({
        "input": args.input.display().to_string(),
        "column": args.column,
        "block_size": args.block_size,
        "scheme": args.scheme,
        "rl": args.rl,
        "level": args.level,
    }))
}
