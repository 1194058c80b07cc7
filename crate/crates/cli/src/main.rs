//! Command-line front end: fitting, asymptotic variance tables, Monte Carlo
//! studies and the trended-location bootstrap.

mod cmd;
mod config;
mod error;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use blockmax::blocks::Scheme;
use clap::{Args, Parser, Subcommand};

use crate::error::{CliError, CliResult};
use crate::io::{RunManifest, Sink};

#[derive(Parser)]
#[command(name = "blockmax", version, about = "Block maxima PWM estimation of GEV parameters and return levels")]
struct Cli {
    /// Worker threads; defaults to the available cores.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Write the result here instead of standard output; a run manifest is
    /// written alongside as `<output>.manifest.json`.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a GEV law to the block maxima of a series.
    Fit(FitCmd),
    /// Asymptotic covariance diagonals for a shape grid.
    Variance(VarianceCmd),
    /// Run a Monte Carlo study from a config file or a preset.
    Simulate(SimulateCmd),
    /// Parametric bootstrap of the trended-location model.
    Bootstrap(BootstrapCmd),
}

#[derive(Args)]
struct FitCmd {
    /// CSV with a header row.
    input: PathBuf,
    /// Column holding the series.
    #[arg(long, default_value = "value")]
    column: String,
    #[arg(long, short = 'r')]
    block_size: usize,
    #[arg(long, default_value = "disjoint")]
    scheme: Scheme,
    /// Return period; repeat for several.
    #[arg(long = "rl", value_name = "T")]
    rl: Vec<f64>,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: cmd::fit::Format,
}

#[derive(Args)]
struct VarianceCmd {
    /// Comma-separated shapes.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    gamma: Vec<f64>,
    /// Evenly spaced shapes `START:STOP:STEP`, appended to `--gamma`.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value = "both")]
    mode: cmd::variance::Mode,
}

#[derive(Args)]
struct SimulateCmd {
    /// Key-value study configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in study: table1 or figure1.
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated blocks per population return level, e.g. 1e5.
    #[arg(long = "N", value_name = "N")]
    population_blocks: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: cmd::simulate::Format,
}

#[derive(Args)]
struct BootstrapCmd {
    /// CSV with columns season_index, day_index, value.
    #[arg(long)]
    daily: PathBuf,
    /// CSV with columns season_index, x; omit for a series without trend.
    #[arg(long)]
    covariate: Option<PathBuf>,
    /// Days per season; inferred from the first season when omitted.
    #[arg(long, short = 'r')]
    block_size: Option<usize>,
    /// Bootstrap replicates (at least 100).
    #[arg(long = "B", value_name = "B", default_value_t = 1000)]
    replicates: usize,
    #[arg(long, default_value = "circular")]
    mode: Scheme,
    /// Generate replicates without trend and skip re-estimating it.
    #[arg(long)]
    stationary: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long = "rl", value_name = "T", default_value_t = 100.0)]
    rl: f64,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Include every replicate estimate in the output.
    #[arg(long)]
    keep_replicates: bool,
}

fn parse_grid(spec: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::usage(format!("--grid {spec:?}: expected START:STOP:STEP with STEP > 0"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor();
    Ok((0..=count.max(-1.0) as i64).map(|i| start + i as f64 * step).collect())
}

fn run(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot configure threads: {e}")))?;
    }
    let sink = Sink { path: cli.output };
    let start = Instant::now();
    let (name, config, seed) = match &cli.command {
        Command::Fit(a) => {
            let args = cmd::fit::FitArgs {
                input: &a.input,
                column: &a.column,
                block_size: a.block_size,
                scheme: a.scheme,
                rl: &a.rl,
                level: a.level,
                format: a.format,
            };
            ("fit", cmd::fit::run(&args, &sink)?, None)
        }
        Command::Variance(a) => {
            let mut grid = a.gamma.clone();
            if let Some(g) = &a.grid {
                grid.extend(parse_grid(g)?);
            }
            ("variance", cmd::variance::run(&grid, a.mode, &sink)?, None)
        }
        Command::Simulate(a) => {
            let population_blocks = a
                .population_blocks
                .as_deref()
                .map(|v| config::count("N", v))
                .transpose()?;
            let args = cmd::simulate::SimulateArgs {
                config: a.config.as_deref(),
                preset: a.preset.as_deref(),
                reps: a.reps,
                seed: a.seed,
                population_blocks,
                format: a.format,
            };
            ("simulate", cmd::simulate::run(&args, &sink)?, Some(a.seed.unwrap_or(1)))
        }
        Command::Bootstrap(a) => {
            let args = cmd::bootstrap::BootstrapArgs {
                daily: &a.daily,
                covariate: a.covariate.as_deref(),
                block_size: a.block_size,
                replicates: a.replicates,
                mode: a.mode,
                stationary: a.stationary,
                seed: a.seed,
                rl: a.rl,
                level: a.level,
                keep_replicates: a.keep_replicates,
            };
            ("bootstrap", cmd::bootstrap::run(&args, &sink)?, Some(a.seed))
        }
    };
    io::write_manifest(&sink, &RunManifest::new(name, config, seed, start.elapsed()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
