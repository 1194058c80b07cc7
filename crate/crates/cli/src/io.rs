//! CSV ingestion, output sinks and run manifests.

use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// A parsed CSV file: header names and numeric rows with their line numbers.
pub struct Table {
    pub path: String,
    pub header: Vec<String>,
    pub rows: Vec<(u64, Vec<f64>)>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn require(&self, name: &str) -> CliResult<usize> {
        self.column(name).ok_or_else(|| {
            CliError::usage(format!(
                "{}: missing column {name:?} (header: {})",
                self.path,
                self.header.join(",")
            ))
        })
    }
}

/// Reads a headed CSV whose fields all parse as numbers. Parsing is
/// locale-independent; blank lines are skipped.
pub fn read_table(path: &Path) -> CliResult<Table> {
    let name = path.display().to_string();
    let file = File::open(path).map_err(|source| CliError::Io {
        path: name.clone(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let input_err = |line: u64, reason: String| CliError::Input {
        path: name.clone(),
        line,
        reason,
    };
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| input_err(1, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.is_empty() || header.iter().all(String::is_empty) {
        return Err(input_err(1, "a header row is required".into()));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            input_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let values = record
            .iter()
            .map(|field| {
                field
                    .parse::<f64>()
                    .map_err(|_| input_err(line, format!("cannot parse {field:?} as a number")))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push((line, values));
    }
    Ok(Table {
        path: name,
        header,
        rows,
    })
}

/// Destination of the primary output: a file or standard output.
pub struct Sink {
    pub path: Option<PathBuf>,
}

impl Sink {
    pub fn writer(&self) -> CliResult<Box<dyn Write>> {
        Ok(match &self.path {
            Some(p) => Box::new(File::create(p).map_err(|source| CliError::Io {
                path: p.display().to_string(),
                source,
            })?),
            None => Box::new(io::stdout().lock()),
        })
    }

    pub fn write_json<T: Serialize>(&self, value: &T) -> CliResult<()> {
        let mut w = self.writer()?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w).map_err(|source| self.io_error(source))
    }

    pub fn write_text(&self, text: &str) -> CliResult<()> {
        let mut w = self.writer()?;
        w.write_all(text.as_bytes()).map_err(|source| self.io_error(source))
    }

    fn io_error(&self, source: io::Error) -> CliError {
        CliError::Io {
            path: self
                .path
                .as_ref()
                .map_or_else(|| "<stdout>".into(), |p| p.display().to_string()),
            source,
        }
    }
}

/// Machine format: 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// Provenance written next to every output file as `<output>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub wall_time_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>, wall: Duration) -> Self {
        RunManifest {
            command: command.into(),
            config,
            seed,
            version: env!("CARGO_PKG_VERSION"),
            wall_time_seconds: wall.as_secs_f64(),
        }
    }
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// Writes the manifest beside `sink` when it is a file.
pub fn write_manifest(sink: &Sink, manifest: &RunManifest) -> CliResult<()> {
    if let Some(path) = &sink.path {
        let target = Sink {
            path: Some(manifest_path(path)),
        };
        target.write_json(manifest)?;
    }
    Ok(())
}
