//! End-to-end tests of the `geomrec` binary: exit codes, output shapes,
//! determinism across runs and thread counts, and estimate quality on
//! synthetic data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use geomrec::dist::ParentDistribution;
use geomrec::montecarlo::replication_rng;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_geomrec"));
    // Isolate from the ambient environment so thread-count tests are exact.
    cmd.env_remove("GEOMREC_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Writes `n` draws from the given parent, one per line.
fn write_draws(path: &Path, dist: &str, n: usize, seed: u64) {
    let dist: ParentDistribution = dist.parse().unwrap();
    let mut rng = replication_rng(seed, 0);
    let mut body = String::with_capacity(n * 20);
    for _ in 0..n {
        body.push_str(&dist.sample(&mut rng).to_string());
        body.push('\n');
    }
    fs::write(path, body).unwrap();
}

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/synthetic_prices.csv")
}

// =============================================================
// estimate
// =============================================================

#[test]
fn estimate_recovers_the_index_on_heavy_tailed_data() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pareto21.txt");
    write_draws(&file, "pareto:2,1", 100_000, 777);

    let out = run(&[
        "estimate",
        "--input",
        file.to_str().unwrap(),
        "--delta",
        "0.4",
        "--m",
        "5",
        "--A",
        "2.5",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let gamma_hat = json["gamma_hat"].as_f64().unwrap();
    assert!(
        (gamma_hat - 2.0).abs() < 0.5,
        "estimate {gamma_hat} is far from 2"
    );
    assert!(json["n_blocks"].as_u64().unwrap() > 0);
    assert!(json["sigma_hat"].as_f64().unwrap() > 0.0);
    let ci = json["ci"].as_array().unwrap();
    assert!(ci[0].as_f64().unwrap() < gamma_hat);
    assert!(ci[1].as_f64().unwrap() > gamma_hat);
}

#[test]
fn estimate_without_activation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("small.txt");
    fs::write(&file, "1.0\n2.0\n3.0\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        file.to_str().unwrap(),
        "--delta",
        "0.5",
        "--m",
        "5",
        "--A",
        "5",
    ]);
    assert_eq!(code(&out), 2, "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("activation"));
}

#[test]
fn estimate_that_does_not_exist_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("single.txt");
    // One activation barely above the threshold: no jump information and
    // no further records, so neither variant can produce an estimate.
    fs::write(&file, "5.5\n").unwrap();
    for variant in ["practical", "complete"] {
        let out = run(&[
            "estimate",
            "--input",
            file.to_str().unwrap(),
            "--delta",
            "0.5",
            "--m",
            "5",
            "--A",
            "5",
            "--variant",
            variant,
        ]);
        assert_eq!(code(&out), 3, "variant {variant}: {}", stderr_of(&out));
    }
}

#[test]
fn missing_input_file_exits_four() {
    let out = run(&[
        "estimate",
        "--input",
        "/nonexistent/values.txt",
        "--delta",
        "0.5",
        "--m",
        "5",
    ]);
    assert_eq!(code(&out), 4, "stderr: {}", stderr_of(&out));
}

#[test]
fn malformed_value_file_exits_five() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.txt");
    fs::write(&file, "1.0\nbanana\n3.0\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        file.to_str().unwrap(),
        "--delta",
        "0.5",
        "--m",
        "5",
    ]);
    assert_eq!(code(&out), 5, "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("line 2"));
}

// =============================================================
// usage errors
// =============================================================

#[test]
fn usage_errors_exit_sixty_four() {
    // Zero replications.
    let out = run(&[
        "simulate-table",
        "--dist",
        "pareto:2,1",
        "--reps",
        "0",
    ]);
    assert_eq!(code(&out), 64, "stderr: {}", stderr_of(&out));

    // Cross-check flag contradicting the distribution string.
    let out = run(&[
        "simulate-table",
        "--dist",
        "pareto:2,1",
        "--gamma",
        "3",
        "--reps",
        "5",
    ]);
    assert_eq!(code(&out), 64);
    assert!(stderr_of(&out).contains("contradicts"));

    // Unknown flag (argument-parser error).
    let out = run(&["estimate", "--frobnicate"]);
    assert_eq!(code(&out), 64);

    // Unsupported output format for the subcommand.
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("v.txt");
    fs::write(&file, "2.0\n3.0\n4.0\n").unwrap();
    let out = run(&[
        "estimate",
        "--input",
        file.to_str().unwrap(),
        "--delta",
        "0.5",
        "--m",
        "5",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 64);

    // Malformed grid.
    let out = run(&[
        "delta-scan",
        "--input",
        file.to_str().unwrap(),
        "--values",
        "--deltas",
        "0.8:0.2:0.1",
    ]);
    assert_eq!(code(&out), 64);
}

#[test]
fn help_and_version_exit_zero() {
    let out = run(&["--help"]);
    assert_eq!(code(&out), 0);
    assert!(stdout_of(&out).contains("delta-scan"));
    let out = run(&["--version"]);
    assert_eq!(code(&out), 0);
    let out = run(&["estimate", "--help"]);
    assert_eq!(code(&out), 0);
}

// =============================================================
// determinism
// =============================================================

#[test]
fn simulation_output_is_identical_across_runs_and_thread_counts() {
    let args = [
        "simulate-table",
        "--dist",
        "pareto:2,1",
        "--deltas",
        "0.5,0.6",
        "--ks",
        "5",
        "--ells",
        "3",
        "--m",
        "5",
        "--A",
        "1.5",
        "--n-records",
        "8",
        "--reps",
        "60",
        "--seed",
        "99",
    ];
    let first = run(&args);
    assert_eq!(code(&first), 0, "stderr: {}", stderr_of(&first));
    let again = run(&args);
    assert_eq!(first.stdout, again.stdout, "two identical runs diverged");

    let mut with_threads = args.to_vec();
    with_threads.extend_from_slice(&["--threads", "4"]);
    let threaded = run(&with_threads);
    assert_eq!(code(&threaded), 0);
    assert_eq!(
        first.stdout, threaded.stdout,
        "thread count changed the bytes"
    );

    let enved = bin()
        .args(args)
        .env("GEOMREC_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&enved), 0, "stderr: {}", stderr_of(&enved));
    assert_eq!(first.stdout, enved.stdout, "env thread override diverged");
}

#[test]
fn bad_thread_env_is_a_usage_error() {
    let out = bin()
        .args(["simulate-clt", "--gamma", "2", "--delta", "0.5", "--reps", "10", "--n-blocks", "10"])
        .env("GEOMREC_THREADS", "zebra")
        .output()
        .unwrap();
    assert_eq!(code(&out), 64);
    assert!(stderr_of(&out).contains("GEOMREC_THREADS"));
}

// =============================================================
// delta-scan / esf on value files
// =============================================================

#[test]
fn delta_scan_covers_the_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pareto31.txt");
    write_draws(&file, "pareto:3,1", 20_000, 778);

    let out = run(&[
        "delta-scan",
        "--input",
        file.to_str().unwrap(),
        "--values",
        "--deltas",
        "0.2:0.8:0.01",
        "--m",
        "5",
        "--A",
        "2",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 62, "header plus 61 grid rows");
    assert_eq!(lines[0], "delta,gamma_hat,ci_low,ci_high,n_blocks");
    assert!(lines[1].starts_with("0.2,"));
    assert!(lines[61].starts_with("0.8,"));
    // Every width has data here, so every row carries an estimate. Wide
    // windows see only a dozen records and are individually noisy, so the
    // per-row check is a loose sanity band; narrow windows are tighter.
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        let delta: f64 = fields[0].parse().unwrap();
        let gamma: f64 = fields[1].parse().expect("estimate present");
        assert!(gamma > 0.5 && gamma < 9.0, "{line}");
        if delta <= 0.5 {
            assert!((gamma - 3.0).abs() < 1.2, "{line}");
        }
    }
}

#[test]
fn esf_fit_reports_the_negated_index_as_slope() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("pareto31.txt");
    write_draws(&file, "pareto:3,1", 20_000, 779);

    let out = run(&[
        "esf",
        "--input",
        file.to_str().unwrap(),
        "--values",
        "--threshold",
        "1.5",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let slope = json["slope"].as_f64().unwrap();
    assert!((slope + 3.0).abs() < 0.3, "slope {slope} far from -3");

    // CSV variant emits the regression points instead.
    let out = run(&[
        "esf",
        "--input",
        file.to_str().unwrap(),
        "--values",
        "--threshold",
        "1.5",
        "--format",
        "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout_of(&out);
    assert!(text.starts_with("log_x,log_esf\n"));
    assert!(text.lines().count() > 100);
}

// =============================================================
// trace / simulate-clt
// =============================================================

#[test]
fn trace_emits_both_estimator_paths() {
    let out = run(&[
        "trace",
        "--dist",
        "loglogistic:3",
        "--n",
        "10000",
        "--delta",
        "0.5",
        "--m",
        "5",
        "--A",
        "3",
        "--k",
        "2",
        "--seed",
        "5",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.starts_with("estimator,ess,estimate\n"));
    let geo: Vec<u64> = text
        .lines()
        .filter(|l| l.starts_with("geometric,"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let hill: Vec<u64> = text
        .lines()
        .filter(|l| l.starts_with("hill,"))
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(geo.len() > 5, "geometric trace too short: {}", geo.len());
    assert!(hill.len() > 5, "hill trace too short: {}", hill.len());
    assert!(geo.windows(2).all(|w| w[0] < w[1]));
    assert!(hill.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn simulate_clt_reports_study_fields() {
    let out = run(&[
        "simulate-clt",
        "--gamma",
        "2",
        "--delta",
        "0.5",
        "--m",
        "5",
        "--n-blocks",
        "60",
        "--reps",
        "150",
        "--seed",
        "11",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    assert!(json["empirical_sd"].as_f64().unwrap() > 0.0);
    assert!(json["theoretical_sd"].as_f64().unwrap() > 0.0);
    let coverage = json["coverage"].as_f64().unwrap();
    assert!((0.8..=1.0).contains(&coverage), "coverage {coverage}");
    assert_eq!(json["n_blocks"].as_u64().unwrap(), 60);
}

// =============================================================
// returns / esf on the price fixture
// =============================================================

#[test]
fn returns_skips_malformed_rows_with_a_warning() {
    let out = run(&["returns", "--input", fixture().to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stderr_of(&out).contains("skipped 1 malformed row"));
    let text = stdout_of(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "label,log_return,z_abs");
    // 340 data rows, one malformed: 339 prices give 338 returns.
    assert_eq!(lines.len(), 339);
    let fields: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(fields.len(), 3);
    fields[1].parse::<f64>().unwrap();
    assert!(fields[2].parse::<f64>().unwrap() >= 0.0);
}

#[test]
fn esf_runs_on_a_price_csv_by_default() {
    let out = run(&[
        "esf",
        "--input",
        fixture().to_str().unwrap(),
        "--threshold",
        "0.5",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let json: serde_json::Value = serde_json::from_str(&stdout_of(&out)).unwrap();
    let slope = json["slope"].as_f64().unwrap();
    assert!(slope.is_finite() && slope < 0.0, "slope {slope}");
}

// =============================================================
// --out plumbing
// =============================================================

#[test]
fn out_flag_writes_the_same_bytes_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let values = dir.path().join("v.txt");
    write_draws(&values, "pareto:2,1", 5_000, 780);
    let args = [
        "delta-scan",
        "--input",
        values.to_str().unwrap(),
        "--values",
        "--deltas",
        "0.4,0.5",
        "--m",
        "5",
        "--A",
        "2",
    ];
    let direct = run(&args);
    assert_eq!(code(&direct), 0);

    let target = dir.path().join("scan.csv");
    let mut with_out = args.to_vec();
    with_out.extend_from_slice(&["--out", target.to_str().unwrap()]);
    let out = run(&with_out);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(stdout_of(&out).is_empty());
    assert_eq!(fs::read(&target).unwrap(), direct.stdout);
}
