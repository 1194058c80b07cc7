//! `blockmax variance`: asymptotic covariance diagonals over a shape grid.

use blockmax::asympt::{self, SHAPE_RANGE};
use blockmax::blocks::Scheme;

use crate::error::{CliError, CliResult};
use crate::io::{num, Sink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Mode {
    Disjoint,
    Sliding,
    Both,
}

fn columns(prefix: &str) -> Vec<String> {
    (0..3).map(|k| format!("{prefix}{k}{k}")).collect()
}

pub fn header(mode: Mode) -> Vec<String> {
    let mut h = vec!["gamma".to_string()];
    let tags: &[&str] = match mode {
        Mode::Disjoint => &["db"],
        Mode::Sliding => &["sl"],
        Mode::Both => &["db", "sl"],
    };
    for t in tags {
        h.extend(columns(&format!("omega_{t}_")));
        h.extend(columns(&format!("sigma_{t}_")));
    }
    if mode == Mode::Both {
        h.extend(columns("omega_ratio_"));
        h.extend(columns("sigma_ratio_"));
    }
    h
}

fn diagonals(gamma: f64, scheme: Scheme) -> CliResult<([f64; 3], [f64; 3])> {
    Ok((
        asympt::omega(gamma, scheme)?.diagonal(),
        asympt::sigma(gamma, scheme)?.diagonal(),
    ))
}

/// One CSV row per admissible shape; shapes outside the admissible range
/// are skipped with a warning on standard error.
pub fn run(grid: &[f64], mode: Mode, sink: &Sink) -> CliResult<serde_json::Value> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header(mode))?;
    for &g in grid {
        if !(g > SHAPE_RANGE.0 && g < SHAPE_RANGE.1) {
            eprintln!(
                "warning: skipping shape {g}, outside ({}, {})",
                SHAPE_RANGE.0, SHAPE_RANGE.1
            );
            continue;
        }
        let mut row = vec![num(g)];
        let mut parts = Vec::new();
        for scheme in match mode {
            Mode::Disjoint => vec![Scheme::Disjoint],
            Mode::Sliding => vec![Scheme::Sliding],
            Mode::Both => vec![Scheme::Disjoint, Scheme::Sliding],
        } {
            let (o, s) = diagonals(g, scheme)?;
            row.extend(o.iter().chain(&s).map(|&v| num(v)));
            parts.push((o, s));
        }
        if let [(od, sd), (os, ss)] = parts.as_slice() {
            row.extend((0..3).map(|k| num(od[k] / os[k])));
            row.extend((0..3).map(|k| num(sd[k] / ss[k])));
        }
        w.write_record(&row)?;
    }
    let text = String::from_utf8(w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))?).expect("CSV output is UTF-8");
    sink.write_text(&text)?;
    Ok(serde_json::json!({ "gamma": grid, "mode": format!("{mode:?}").to_lowercase() }))
}
