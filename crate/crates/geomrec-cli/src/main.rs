//! `geomrec`: command-line front end for tail-index estimation from
//! geometric records.
//!
//! Subcommands map one-to-one onto the library pipelines:
//!
//! * `estimate`      - estimate the tail index of a value file
//! * `simulate-table`- Monte Carlo comparison table (CSV)
//! * `simulate-clt`  - sampling-distribution study of the estimator (JSON)
//! * `trace`         - estimate-versus-usage traces for one stream (CSV)
//! * `returns`       - price CSV to standardized log-returns (CSV)
//! * `esf`           - empirical survival function log-log fit
//! * `delta-scan`    - estimates across a grid of window widths (CSV)
//!
//! Exit codes: 0 success; 2 no observation above the activation threshold;
//! 3 the requested estimate does not exist for the data; 4 I/O failure;
//! 5 malformed or out-of-domain data; 64 usage error; 1 any other failure.
//!
//! Every run with identical flags and seed produces byte-identical output,
//! regardless of thread count.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use geomrec::dist::ParentDistribution;
use geomrec::error::Error;
use geomrec::estimators::{mle_complete, mle_practical};
use geomrec::finance::{delta_scan, esf_fit, prices_to_returns, read_prices_csv};
use geomrec::montecarlo::{clt_study, replicate, trace_paths, TrialConfig, DEFAULT_MAX_RAW};
use geomrec::records::{read_observations, Extractor, GeomRecordParams};

// =============================================================
// Argument surface
// =============================================================

#[derive(Parser)]
#[command(
    name = "geomrec",
    version,
    about = "Tail-index estimation from geometric records",
    propagate_version = true
)]
struct Cli {
    /// Master seed for all randomized subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output format; each subcommand documents which it supports.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Worker threads for parallel subcommands (default: all cores).
    /// The GEOMREC_THREADS environment variable takes precedence.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Complete,
    Practical,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the tail index from a file of positive values
    /// (one per line; `#` comments and blank lines ignored). JSON output.
    Estimate {
        /// Input value file.
        #[arg(long)]
        input: PathBuf,
        /// Relative window width in (0, 1).
        #[arg(long)]
        delta: f64,
        /// Number of window subintervals (>= 2).
        #[arg(long)]
        m: u32,
        /// Activation threshold; observations are discarded until one
        /// exceeds it (0 activates on the first observation).
        #[arg(long = "A", default_value_t = 0.0)]
        threshold_a: f64,
        /// Which estimator variant to apply.
        #[arg(long, value_enum, default_value_t = VariantArg::Practical)]
        variant: VariantArg,
        /// Confidence level complement for the reported interval.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },

    /// Monte Carlo comparison table across estimators. CSV output.
    SimulateTable {
        /// Parent distribution, e.g. `pareto:2,1` or `loglogistic:3`.
        #[arg(long)]
        dist: String,
        /// Optional cross-check: must equal the tail index implied by --dist.
        #[arg(long)]
        gamma: Option<f64>,
        /// Window widths: comma list or start:end:step grid.
        #[arg(long, default_value = "0.8,0.6,0.5,0.4,0.2")]
        deltas: String,
        /// Top-statistics levels (comma list).
        #[arg(long, default_value = "5,10,15,20,30")]
        ks: String,
        /// Record-spacing lags (comma list).
        #[arg(long, default_value = "3,4,5,6,7")]
        ells: String,
        /// Number of window subintervals.
        #[arg(long, default_value_t = 5)]
        m: u32,
        /// Activation threshold.
        #[arg(long = "A", default_value_t = 5.0)]
        threshold_a: f64,
        /// Records to collect per replication.
        #[arg(long, default_value_t = 10)]
        n_records: usize,
        /// Replications per configuration.
        #[arg(long, default_value_t = 10_000)]
        reps: u64,
        /// Raw-observation budget per replication.
        #[arg(long, default_value_t = DEFAULT_MAX_RAW)]
        max_raw: u64,
    },

    /// Sampling-distribution study of the estimator. JSON output.
    SimulateClt {
        /// True tail index of the generating law.
        #[arg(long)]
        gamma: f64,
        /// Relative window width in (0, 1).
        #[arg(long)]
        delta: f64,
        /// Number of window subintervals.
        #[arg(long, default_value_t = 5)]
        m: u32,
        /// Blocks per replication.
        #[arg(long, default_value_t = 500)]
        n_blocks: usize,
        /// Replications.
        #[arg(long, default_value_t = 2_000)]
        reps: u64,
        /// Nominal interval miss probability.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },

    /// Estimate-versus-usage traces for one simulated stream. CSV output.
    Trace {
        /// Parent distribution, e.g. `loglogistic:3`.
        #[arg(long)]
        dist: String,
        /// Raw observations to stream.
        #[arg(long, default_value_t = 10_000)]
        n: u64,
        /// Relative window width in (0, 1).
        #[arg(long)]
        delta: f64,
        /// Number of window subintervals.
        #[arg(long, default_value_t = 5)]
        m: u32,
        /// Activation threshold.
        #[arg(long = "A", default_value_t = 0.0)]
        threshold_a: f64,
        /// Top-statistics level for the comparison trace.
        #[arg(long)]
        k: usize,
    },

    /// Convert a `date,close` price CSV into standardized log-returns.
    /// CSV output; malformed rows are skipped with a warning.
    Returns {
        /// Input price CSV with a header row.
        #[arg(long)]
        input: PathBuf,
    },

    /// Fit the empirical survival function above a threshold on log-log
    /// scale. JSON output (the fit) or CSV (the regression points).
    Esf {
        /// Input file: price CSV by default, value file with --values.
        #[arg(long)]
        input: PathBuf,
        /// Lower cutoff of the regression range.
        #[arg(long)]
        threshold: f64,
        /// Treat the input as raw positive values (one per line) instead
        /// of a price CSV.
        #[arg(long, default_value_t = false)]
        values: bool,
    },

    /// Estimate across a grid of window widths. CSV output.
    DeltaScan {
        /// Input file: price CSV by default, value file with --values.
        #[arg(long)]
        input: PathBuf,
        /// Window widths: comma list or start:end:step grid.
        #[arg(long)]
        deltas: String,
        /// Number of window subintervals.
        #[arg(long, default_value_t = 5)]
        m: u32,
        /// Activation threshold on the analyzed values.
        #[arg(long = "A", default_value_t = 0.0)]
        threshold_a: f64,
        /// Nominal interval miss probability.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Treat the input as raw positive values (one per line) instead
        /// of a price CSV.
        #[arg(long, default_value_t = false)]
        values: bool,
    },
}

// =============================================================
// Failure plumbing
// =============================================================

enum Failure {
    /// Wrong invocation: exits 64.
    Usage(String),
    /// A library error: exits by category.
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn lib_exit_code(err: &Error) -> u8 {
    match err {
        Error::NotActivated(_) => 2,
        Error::MleNonexistent(_) | Error::EmptySample(_) => 3,
        Error::Io(_) => 4,
        Error::Parse(_) | Error::Domain(_) => 5,
        Error::InvalidParameter(_) => 64,
        _ => 1,
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

// =============================================================
// Entry point
// =============================================================

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests print to stdout and succeed; real
            // argument errors print to stderr and exit as usage errors.
            let code = if e.use_stderr() { 64 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(64)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(lib_exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads(cli.threads)?;
    let output = dispatch(&cli)?;
    match &cli.out {
        Some(path) => std::fs::write(path, output.as_bytes())?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(output.as_bytes())?;
            lock.flush()?;
        }
    }
    Ok(())
}

/// Applies GEOMREC_THREADS (which wins) or --threads to the global pool.
fn configure_threads(flag: Option<usize>) -> Result<(), Failure> {
    let threads = match std::env::var("GEOMREC_THREADS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Some(n),
            _ => return usage(format!("GEOMREC_THREADS must be a positive integer, got {raw:?}")),
        },
        Err(_) => flag,
    };
    if let Some(n) = threads {
        if n == 0 {
            return usage("--threads must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("could not size the thread pool: {e}")))?;
    }
    Ok(())
}

/// Resolves the requested format against what the subcommand supports.
fn resolve_format(
    requested: Option<OutputFormat>,
    default: OutputFormat,
    supported: &[OutputFormat],
    subcommand: &str,
) -> Result<OutputFormat, Failure> {
    let format = requested.unwrap_or(default);
    if supported.contains(&format) {
        Ok(format)
    } else {
        let name = match format {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        usage(format!("{subcommand} does not support --format {name}"))
    }
}

fn dispatch(cli: &Cli) -> Result<String, Failure> {
    use OutputFormat::{Csv, Json};
    match &cli.command {
        Command::Estimate {
            input,
            delta,
            m,
            threshold_a,
            variant,
            alpha,
        } => {
            resolve_format(cli.format, Json, &[Json], "estimate")?;
            cmd_estimate(input, *delta, *m, *threshold_a, *variant, *alpha)
        }
        Command::SimulateTable {
            dist,
            gamma,
            deltas,
            ks,
            ells,
            m,
            threshold_a,
            n_records,
            reps,
            max_raw,
        } => {
            resolve_format(cli.format, Csv, &[Csv], "simulate-table")?;
            cmd_simulate_table(
                dist,
                *gamma,
                deltas,
                ks,
                ells,
                *m,
                *threshold_a,
                *n_records,
                *reps,
                *max_raw,
                cli.seed,
            )
        }
        Command::SimulateClt {
            gamma,
            delta,
            m,
            n_blocks,
            reps,
            alpha,
        } => {
            resolve_format(cli.format, Json, &[Json], "simulate-clt")?;
            let report = clt_study(*gamma, *delta, *m, *n_blocks, *reps, *alpha, cli.seed)?;
            Ok(ensure_trailing_newline(report.to_json()))
        }
        Command::Trace {
            dist,
            n,
            delta,
            m,
            threshold_a,
            k,
        } => {
            resolve_format(cli.format, Csv, &[Csv], "trace")?;
            let dist = parse_dist(dist)?;
            let params = GeomRecordParams::new(*delta, *m, *threshold_a)?;
            let report = trace_paths(&dist, *n, params, *k, cli.seed)?;
            Ok(report.to_csv())
        }
        Command::Returns { input } => {
            resolve_format(cli.format, Csv, &[Csv], "returns")?;
            let (prices, skipped) = read_prices_csv(open(input)?)?;
            if skipped > 0 {
                eprintln!("warning: skipped {skipped} malformed row(s)");
            }
            Ok(prices_to_returns(&prices)?.to_csv())
        }
        Command::Esf {
            input,
            threshold,
            values,
        } => {
            let format = resolve_format(cli.format, Json, &[Csv, Json], "esf")?;
            let z = load_magnitudes(input, *values)?;
            let fit = esf_fit(&z, *threshold)?;
            Ok(match format {
                Json => ensure_trailing_newline(fit.to_json()),
                Csv => fit.points_csv(),
            })
        }
        Command::DeltaScan {
            input,
            deltas,
            m,
            threshold_a,
            alpha,
            values,
        } => {
            resolve_format(cli.format, Csv, &[Csv], "delta-scan")?;
            let grid = parse_grid(deltas)?;
            let z = load_magnitudes(input, *values)?;
            let report = delta_scan(&z, &grid, *m, *threshold_a, *alpha)?;
            Ok(report.to_csv())
        }
    }
}

// =============================================================
// Subcommand bodies
// =============================================================

fn cmd_estimate(
    input: &PathBuf,
    delta: f64,
    m: u32,
    threshold_a: f64,
    variant: VariantArg,
    alpha: f64,
) -> Result<String, Failure> {
    let observations = read_observations(BufReader::new(open(input)?))?;
    let params = GeomRecordParams::new(delta, m, threshold_a)?;
    let mut extractor = Extractor::new(params);
    for &x in &observations {
        extractor.push(x)?;
    }
    let sample = extractor.finalize()?;
    let report = match variant {
        VariantArg::Complete => mle_complete(&sample)?,
        VariantArg::Practical => mle_practical(&sample)?,
    }
    .with_confidence(alpha)?;
    Ok(ensure_trailing_newline(report.to_json()))
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate_table(
    dist: &str,
    gamma: Option<f64>,
    deltas: &str,
    ks: &str,
    ells: &str,
    m: u32,
    threshold_a: f64,
    n_records: usize,
    reps: u64,
    max_raw: u64,
    seed: u64,
) -> Result<String, Failure> {
    if reps == 0 {
        return usage("--reps must be at least 1");
    }
    let dist = parse_dist(dist)?;
    if let Some(g) = gamma {
        if (g - dist.tail_index()).abs() > 1e-9 {
            return usage(format!(
                "--gamma {g} contradicts the tail index {} implied by --dist",
                dist.tail_index()
            ));
        }
    }
    let config = TrialConfig {
        dist,
        deltas: parse_grid(deltas)?,
        m,
        threshold_a,
        n_records,
        hill_ks: parse_usize_list(ks, "--ks")?,
        berred_ells: parse_usize_list(ells, "--ells")?,
        max_raw,
    };
    let summary = replicate(&config, reps, seed)?;
    Ok(summary.to_csv())
}

// =============================================================
// Input and flag helpers
// =============================================================

fn open(path: &PathBuf) -> Result<File, Failure> {
    File::open(path).map_err(|e| {
        Failure::Lib(Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn parse_dist(s: &str) -> Result<ParentDistribution, Failure> {
    s.parse::<ParentDistribution>().map_err(Failure::Lib)
}

/// Analyzed magnitudes: absolute standardized returns of a price CSV, or
/// the file's values verbatim when `values` is set.
fn load_magnitudes(input: &PathBuf, values: bool) -> Result<Vec<f64>, Failure> {
    if values {
        Ok(read_observations(BufReader::new(open(input)?))?)
    } else {
        let mut raw = String::new();
        open(input)?.read_to_string(&mut raw).map_err(Error::from)?;
        let (prices, skipped) = read_prices_csv(raw.as_bytes())?;
        if skipped > 0 {
            eprintln!("warning: skipped {skipped} malformed row(s)");
        }
        Ok(prices_to_returns(&prices)?.z_abs)
    }
}

/// Parses `a,b,c` lists and inclusive `start:end:step` grids. Grid points
/// are generated with scaled-integer arithmetic so `0.2:0.8:0.01` yields
/// exactly 61 well-rounded values.
fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let s = s.trim();
    if s.is_empty() {
        return usage("empty grid specification");
    }
    if !s.contains(':') {
        let mut out = Vec::new();
        for piece in s.split(',') {
            let piece = piece.trim();
            out.push(
                piece
                    .parse::<f64>()
                    .map_err(|_| Failure::Usage(format!("invalid grid value {piece:?}")))?,
            );
        }
        return Ok(out);
    }

    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return usage(format!("grid {s:?} must have the form start:end:step"));
    }
    let decimals = parts
        .iter()
        .map(|p| p.split('.').nth(1).map_or(0, str::len))
        .max()
        .unwrap_or(0);
    if decimals > 12 {
        return usage(format!("grid {s:?} has too many decimal places"));
    }
    let scale = 10f64.powi(decimals as i32);
    let to_scaled = |p: &str| -> Result<i64, Failure> {
        let v = p
            .parse::<f64>()
            .map_err(|_| Failure::Usage(format!("invalid grid bound {p:?}")))?;
        if !v.is_finite() {
            return usage(format!("invalid grid bound {p:?}"));
        }
        Ok((v * scale).round() as i64)
    };
    let (start, end, step) = (to_scaled(parts[0])?, to_scaled(parts[1])?, to_scaled(parts[2])?);
    if step <= 0 {
        return usage("grid step must be positive");
    }
    if end < start {
        return usage("grid end must not precede its start");
    }
    let mut out = Vec::new();
    let mut v = start;
    while v <= end {
        out.push(v as f64 / scale);
        v += step;
    }
    Ok(out)
}

fn parse_usize_list(s: &str, flag: &str) -> Result<Vec<usize>, Failure> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|piece| {
            piece
                .trim()
                .parse::<usize>()
                .map_err(|_| Failure::Usage(format!("{flag}: invalid entry {piece:?}")))
        })
        .collect()
}

fn ensure_trailing_newline(mut s: String) -> String {
    if !s.ends_with('\n') {
        s.push('\n');
    }
    s
}

// =============================================================
// Tests
// =============================================================
