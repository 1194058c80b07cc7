//! End-to-end tests of the `blockmax` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use blockmax::gev::{self, GevParams};
use blockmax::{pwm, rng, trend};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/gev_seasons.csv");

fn blockmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_blockmax"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", stderr(out));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn fixture_series(seed: u64) -> Vec<f64> {
    let theta = GevParams::new(0.0, 1.0, -0.2).unwrap();
    let daily = trend::bootstrap_tilde_params(&theta, 0.0, 0.0, 90);
    gev::gev_sample(&daily, 100 * 90, &mut rng::stream(seed, &[]))
}

#[test]
fn fixture_is_reproducible() {
    let text = std::fs::read_to_string(FIXTURE).unwrap();
    let values: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, fixture_series(2024));
}

#[test]
fn fit_fixture_shape_in_calibrated_band() {
    let report = json(&blockmax(&["fit", FIXTURE, "--block-size", "90", "--rl", "50", "--rl", "100"]));
    let shape = report["params"]["gamma"].as_f64().unwrap();
    assert!((-0.30..=-0.10).contains(&shape), "{shape}");
    assert_eq!(report["return_levels"].as_array().unwrap().len(), 2);
    let row = &report["return_levels"][1];
    assert_eq!(row["t"].as_f64().unwrap(), 100.0);
    assert!(row["lower"].as_f64().unwrap() < row["estimate"].as_f64().unwrap());

    // the fixture estimate is typical for its design
    let mut draws: Vec<f64> = (0..1000u64)
        .map(|s| pwm::fit_disjoint(&fixture_series(10_000 + s), 90).unwrap().params.gamma)
        .collect();
    draws.sort_by(f64::total_cmp);
    assert!(draws[10] < shape && shape < draws[989], "{shape} vs [{}, {}]", draws[10], draws[989]);
}

#[test]
fn fit_formats() {
    let csv_out = blockmax(&["fit", FIXTURE, "-r", "90", "--scheme", "sliding", "--rl", "50", "--format", "csv"]);
    assert!(csv_out.status.success());
    let text = stdout(&csv_out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "quantity,t,estimate,lower,upper");
    assert_eq!(lines.len(), 1 + 6 + 1);
    assert!(lines[7].starts_with("return_level,5.0000000000000000e1,"));
    let table = blockmax(&["fit", FIXTURE, "-r", "90", "--format", "table"]);
    assert!(stdout(&table).contains("shape"));
}

#[test]
fn fit_errors_and_exit_codes() {
    let odd = scratch("odd.csv", &(0..95).fold(String::from("value\n"), |s, i| s + &format!("{}\n", (i * 7 % 13) as f64)));
    let out = blockmax(&["fit", odd.to_str().unwrap(), "-r", "10", "--scheme", "circular"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("multiple"));

    let bad = scratch("bad.csv", "value\n1.0\n2.5\nabc\n4.0\n");
    let out = blockmax(&["fit", bad.to_str().unwrap(), "-r", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    let flat = scratch("flat.csv", &"value\n".chars().chain("1.0\n".repeat(20).chars()).collect::<String>());
    let out = blockmax(&["fit", flat.to_str().unwrap(), "-r", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("violates"), "{}", stderr(&out));

    let out = blockmax(&["fit", "/nonexistent/file.csv", "-r", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let out = blockmax(&["fit", FIXTURE]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn variance_table() {
    let out = blockmax(&["variance", "--grid", "-0.9:0.4:0.1", "--gamma=0.45,0.8"]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("skipping shape 0.8"));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 15);
    let ratio_cols: Vec<usize> = (0..header.len()).filter(|&i| header[i].contains("ratio")).collect();
    assert_eq!(ratio_cols.len(), 6);
    for row in &rows {
        assert!(ratio_cols.iter().all(|&i| row[i] >= 1.0), "{row:?}");
    }
    let zero = rows.iter().find(|r| r[0].abs() < 1e-12).unwrap();
    assert!((zero[1] - 1.644934).abs() < 1e-6);

    let empty = blockmax(&["variance"]);
    assert!(empty.status.success());
    assert_eq!(stdout(&empty).lines().count(), 1);
    let single = blockmax(&["variance", "--gamma=-0.2", "--mode", "sliding"]);
    assert_eq!(stdout(&single).lines().next().unwrap().split(',').count(), 7);
}

#[test]
fn simulate_config_is_deterministic() {
    let cfg = scratch(
        "study.cfg",
        "# small study\nmodel = ar:0.5\nmargin = gpd:-0.2\nscheme = s2\nseasons = 10, 20\nr = 30\nreps = 20\n\
         population_blocks = 2000\ntargets = shape, rl:100\n",
    );
    let args = ["simulate", "--config", cfg.to_str().unwrap(), "--seed", "9"];
    let a = blockmax(&args);
    let b = blockmax(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 2 * 2 * 2);
    assert!(text.starts_with("config,estimator,target,truth,bias,variance,mse,rel_eff,reps,failures"));
    let other = blockmax(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "10"]);
    assert_ne!(a.stdout, other.stdout);
    let flags = blockmax(&["simulate", "--config", cfg.to_str().unwrap(), "--reps", "5", "--format", "json"]);
    let v = json(&flags);
    assert!(v["rows"].as_array().unwrap().iter().all(|r| r["reps"].as_u64().unwrap() + r["failures"].as_u64().unwrap() == 5));
}

#[test]
fn simulate_errors() {
    let out = blockmax(&["simulate", "--preset", "table9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("table1, figure1"));
    let cfg = scratch("bad.cfg", "model = ar:1.2\n");
    let out = blockmax(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("model"));
    let cfg = scratch("unknown.cfg", "blocksize = 3\n");
    let out = blockmax(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("blocksize"));
    assert_eq!(blockmax(&["simulate"]).status.code(), Some(2));
}

#[test]
fn simulate_presets_at_reduced_size() {
    let out = blockmax(&["simulate", "--preset", "table1", "--N", "2e3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 7 * 5 * 2);
    let out = blockmax(&["simulate", "--preset", "figure1", "--reps", "3", "--N", "500"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1 + 5 * 2 * 7 * 2 * 3);
    assert!(text.contains("ar(0.5)/gpd(-0.4)/S2/n=900/r=90,sliding,shape"));
}

fn write_bootstrap_inputs() -> (PathBuf, PathBuf) {
    let text = std::fs::read_to_string(FIXTURE).unwrap();
    let daily = scratch("daily.csv", &text);
    let cov = (1..=100).fold(String::from("season_index,x\n"), |s, t| s + &format!("{t},{}\n", t as f64 / 100.0));
    (daily, scratch("cov.csv", &cov))
}

#[test]
fn bootstrap_runs_and_is_deterministic() {
    let (daily, cov) = write_bootstrap_inputs();
    let out_path = Path::new(env!("CARGO_TARGET_TMPDIR")).join("boot.json");
    let args = [
        "bootstrap",
        "--daily",
        daily.to_str().unwrap(),
        "--covariate",
        cov.to_str().unwrap(),
        "--B",
        "100",
        "--seed",
        "4",
        "--threads",
        "1",
    ];
    let a = json(&blockmax(&args));
    let b = json(&blockmax(&args));
    assert_eq!(a, b);
    assert_eq!(a["block_size"].as_u64().unwrap(), 90);
    assert_eq!(a["season_cis"].as_array().unwrap().len(), 100);
    assert!(a.get("replicates").is_none());
    let kept = (a["config"]["replicates"].as_u64().unwrap() - a["failures"].as_u64().unwrap()) as usize;
    assert_eq!(kept + a["failures"].as_u64().unwrap() as usize, 100);

    let mut with_file = args.to_vec();
    with_file.extend(["--output", out_path.to_str().unwrap(), "--keep-replicates"]);
    assert!(blockmax(&with_file).status.success());
    let written: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(written["replicates"].as_array().unwrap().len(), kept);
    let manifest_path = out_path.with_file_name("boot.json.manifest.json");
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["command"], "bootstrap");
    assert_eq!(manifest["seed"], 4);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);

    let stationary = json(&blockmax(&["bootstrap", "--daily", daily.to_str().unwrap(), "--B", "100", "--stationary", "--mode", "disjoint"]));
    assert_eq!(stationary["estimate"]["slope"].as_f64().unwrap(), 0.0);
}

#[test]
fn bootstrap_errors() {
    let (daily, cov) = write_bootstrap_inputs();
    let out = blockmax(&["bootstrap", "--daily", daily.to_str().unwrap(), "--covariate", cov.to_str().unwrap(), "--B", "50"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("replicates"));
    let out = blockmax(&["bootstrap", "--daily", daily.to_str().unwrap(), "--B", "100"]);
    assert_eq!(out.status.code(), Some(2));
    let short = scratch("short_cov.csv", "season_index,x\n1,0.5\n");
    let out = blockmax(&["bootstrap", "--daily", daily.to_str().unwrap(), "--covariate", short.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("season 2"));
}
