//! Reproducible simulation studies.
//!
//! A *trial* draws one i.i.d. stream from a parent distribution and runs it
//! until the `(n_records + 1)`-th record arrives, which closes the
//! `n_records`-th block. Every configured consumer reads the same stream:
//! one geometric-record extractor per `delta`, a shared streaming top-list
//! for the Hill levels, and the plain record values for the record-only
//! baselines.
//!
//! Because only observations above a threshold can matter to any consumer
//! (below the smallest `delta * max` for the extractors, below the running
//! `(k_max + 1)`-th largest for Hill), the stream is advanced by *conditional
//! fast-forwarding* whenever the parent has a closed-form survival: the
//! number of irrelevant observations is drawn as one geometric variable and
//! the next relevant observation is drawn from the conditional law above the
//! threshold. This is exact in distribution and turns streams of millions of
//! observations into a few hundred draws.
//!
//! Reproducibility contract: replication `i` of a study seeded with `s` uses
//! the generator [`replication_rng`]`(s, i)`, so results are independent of
//! the number of worker threads and of the order replications run in.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dist::{direct_generate_sample, ParentDistribution};
use crate::error::{Error, Result};
use crate::estimators::{
    berred_b1, berred_b2, mle_complete, EstimateReport, HillTracker,
};
use crate::records::{Extractor, GeomRecordParams, GeometricRecordSample, PushEvent};

/// Default per-trial budget of post-activation observations.
pub const DEFAULT_MAX_RAW: u64 = 100_000_000;

// =============================================================
// RNG plumbing
// =============================================================

/// The generator for one replication: a ChaCha8 generator seeded with the
/// master seed, switched to stream `rep_index`. Distinct replications get
/// provably non-overlapping streams, and any replication can be reproduced
/// in isolation.
pub fn replication_rng(master_seed: u64, rep_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(rep_index);
    rng
}

// =============================================================
// Trial configuration and output
// =============================================================

/// What one simulated trial measures.
#[derive(Debug, Clone)]
pub struct TrialConfig {
    /// Parent distribution of the stream.
    pub dist: ParentDistribution,
    /// Window widths: one geometric-record extractor per entry.
    pub deltas: Vec<f64>,
    /// Subinterval count shared by all extractors.
    pub m: u32,
    /// Activation threshold shared by all consumers.
    pub threshold_a: f64,
    /// Number of complete blocks to observe; the stream runs until record
    /// `n_records + 1` closes the last of them.
    pub n_records: usize,
    /// Hill levels to track (may be empty).
    pub hill_ks: Vec<usize>,
    /// Lags for the record-only baselines (may be empty; each must be
    /// below `n_records`).
    pub berred_ells: Vec<usize>,
    /// Per-trial budget of post-activation observations; exceeding it aborts
    /// the trial, which the aggregation counts as a failure.
    pub max_raw: u64,
}

impl TrialConfig {
    /// Checks the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        self.dist.validate()?;
        for &d in &self.deltas {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "every delta must lie strictly between 0 and 1, got {d}"
                )));
            }
        }
        if self.m < 2 {
            return Err(Error::InvalidParameter(format!(
                "m must be at least 2, got {}",
                self.m
            )));
        }
        if !self.threshold_a.is_finite() || self.threshold_a < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "activation threshold must be finite and non-negative, got {}",
                self.threshold_a
            )));
        }
        if self.n_records == 0 {
            return Err(Error::InvalidParameter(
                "a trial needs at least one complete block".into(),
            ));
        }
        if self.hill_ks.iter().any(|&k| k == 0) {
            return Err(Error::InvalidParameter(
                "hill levels must satisfy k >= 1".into(),
            ));
        }
        if let Some(&ell) = self.berred_ells.iter().max() {
            if ell == 0 || ell >= self.n_records {
                return Err(Error::InvalidParameter(format!(
                    "record-baseline lags must satisfy 1 <= ell < n_records, got {ell}"
                )));
            }
        }
        if self.max_raw == 0 {
            return Err(Error::InvalidParameter(
                "the raw-observation budget must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One cell of a trial's geometric-record measurements.
#[derive(Debug, Clone, Copy)]
pub struct GeoCell {
    pub delta: f64,
    pub gamma_hat: f64,
    /// Records plus near-records consumed by the estimate.
    pub ess: u64,
}

/// One cell of a trial's Hill measurements.
#[derive(Debug, Clone, Copy)]
pub struct HillCell {
    pub k: usize,
    /// Absent when the stream ended with fewer than `k + 1` observations.
    pub gamma_hat: Option<f64>,
    /// Observations that ranked within the running top `k + 1` on arrival.
    pub ess: u64,
}

/// Everything measured on one simulated stream.
#[derive(Debug, Clone)]
pub struct TrialOutput {
    pub geometric: Vec<GeoCell>,
    pub hill: Vec<HillCell>,
    /// `(ell, estimate)` for the record-spacing baseline.
    pub berred_b1: Vec<(usize, Option<f64>)>,
    /// `(ell, estimate)` for the record-sum baseline.
    pub berred_b2: Vec<(usize, Option<f64>)>,
    /// Post-activation observations the stream consumed.
    pub raw_count: u64,
}

// =============================================================
// The stream engine
// =============================================================

struct StreamOutcome {
    samples: Vec<GeometricRecordSample>,
    tracker: Option<HillTracker>,
    records: Vec<f64>,
    raw_count: u64,
}

/// Runs one stream to the record that closes block `n_records`, feeding all
/// configured consumers. Exact in distribution; fast-forwards through
/// irrelevant observations when the parent has closed-form survival.
fn stream_trial(config: &TrialConfig, rng: &mut ChaCha8Rng) -> Result<StreamOutcome> {
    let mut extractors: Vec<Extractor> = config
        .deltas
        .iter()
        .map(|&d| GeomRecordParams::new(d, config.m, config.threshold_a).map(Extractor::new))
        .collect::<Result<_>>()?;
    let mut tracker = if config.hill_ks.is_empty() {
        None
    } else {
        Some(HillTracker::new(&config.hill_ks)?)
    };
    let delta_min = config
        .deltas
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let fast = config.dist.has_closed_survival();
    let cap = config.max_raw;

    // --- activation: draw the first observation above the threshold ---
    // Observations at or below A never reach any consumer and are not
    // counted, so the exceedance is drawn directly from the conditional law.
    let first = if fast && config.threshold_a > 0.0 {
        let s_a = config
            .dist
            .survival(config.threshold_a)
            .expect("closed-form survival");
        if s_a <= 0.0 {
            return Err(Error::Domain(format!(
                "activation threshold {} sits beyond the numeric tail",
                config.threshold_a
            )));
        }
        loop {
            let x = config
                .dist
                .inverse_survival(open_unit(rng) * s_a)
                .expect("closed-form inverse survival");
            if x > config.threshold_a && x.is_finite() {
                break x;
            }
        }
    } else {
        loop {
            let x = config.dist.sample(rng);
            if x > config.threshold_a {
                break x;
            }
        }
    };
    let mut raw: u64 = 1;
    let mut records = vec![first];
    for ex in &mut extractors {
        ex.push(first)?;
    }
    if let Some(t) = tracker.as_mut() {
        t.push(first)?;
    }

    // --- main loop: one relevant observation per iteration ---
    let target = config.n_records + 1;
    while records.len() < target {
        // Threshold below which no consumer can be affected.
        let current_max = *records.last().expect("activated");
        let mut threshold: Option<f64> = None;
        if !extractors.is_empty() {
            threshold = Some(delta_min * current_max);
        }
        if let Some(t) = tracker.as_ref() {
            match t.floor() {
                // The Hill list still has room: every arrival matters.
                None => threshold = None,
                Some(f) => {
                    threshold = Some(match threshold {
                        Some(g) => g.min(f),
                        None => f,
                    });
                }
            }
        }

        let x = match threshold {
            Some(t) if fast && t > 0.0 => {
                let p_t = config.dist.survival(t).expect("closed-form survival");
                if p_t <= 0.0 {
                    // The tail beyond t has no numeric mass left: the wait
                    // for the next relevant observation exceeds any budget.
                    return Err(Error::TrialAborted { cap });
                }
                if p_t < 1.0 {
                    // Irrelevant observations before the next exceedance.
                    let u = open_unit(rng);
                    let gap = (u.ln() / (-p_t).ln_1p()).floor();
                    let remaining = (cap - raw) as f64;
                    if !gap.is_finite() || gap + 1.0 > remaining {
                        return Err(Error::TrialAborted { cap });
                    }
                    raw += gap as u64;
                }
                if raw + 1 > cap {
                    return Err(Error::TrialAborted { cap });
                }
                raw += 1;
                let x = config
                    .dist
                    .inverse_survival(open_unit(rng) * p_t)
                    .expect("closed-form inverse survival");
                if !(x > t) || !x.is_finite() {
                    // Rounding pushed the conditional draw onto the
                    // threshold; it was counted, and contributes nothing.
                    continue;
                }
                x
            }
            _ => {
                if raw + 1 > cap {
                    return Err(Error::TrialAborted { cap });
                }
                raw += 1;
                let x = config.dist.sample(rng);
                if let Some(t) = threshold {
                    if x <= t {
                        continue;
                    }
                }
                x
            }
        };

        for ex in &mut extractors {
            ex.push(x)?;
        }
        if let Some(t) = tracker.as_mut() {
            t.push(x)?;
        }
        if x > current_max {
            records.push(x);
        }
    }

    let samples = extractors
        .into_iter()
        .map(Extractor::finalize)
        .collect::<Result<Vec<_>>>()?;
    Ok(StreamOutcome {
        samples,
        tracker,
        records,
        raw_count: raw,
    })
}

fn open_unit(rng: &mut ChaCha8Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

/// Runs replication `rep_index` of a trial and reduces it to per-estimator
/// measurements.
pub fn run_trial(config: &TrialConfig, master_seed: u64, rep_index: u64) -> Result<TrialOutput> {
    let mut rng = replication_rng(master_seed, rep_index);
    let outcome = stream_trial(config, &mut rng)?;

    let mut geometric = Vec::with_capacity(outcome.samples.len());
    for sample in &outcome.samples {
        let report = mle_complete(sample)?;
        debug_assert_eq!(report.n_blocks, config.n_records);
        geometric.push(GeoCell {
            delta: sample.params().delta(),
            gamma_hat: report.gamma_hat,
            ess: report.ess,
        });
    }

    let mut hill = Vec::with_capacity(config.hill_ks.len());
    if let Some(tracker) = outcome.tracker.as_ref() {
        for &k in &config.hill_ks {
            hill.push(HillCell {
                k,
                gamma_hat: tracker.hill_at(k).ok(),
                ess: tracker.measured(k)?,
            });
        }
    }

    let n = config.n_records;
    let berred_b1_cells = config
        .berred_ells
        .iter()
        .map(|&ell| (ell, berred_b1(&outcome.records, ell, n).ok()))
        .collect();
    let berred_b2_cells = config
        .berred_ells
        .iter()
        .map(|&ell| (ell, berred_b2(&outcome.records, ell, n).ok()))
        .collect();

    Ok(TrialOutput {
        geometric,
        hill,
        berred_b1: berred_b1_cells,
        berred_b2: berred_b2_cells,
        raw_count: outcome.raw_count,
    })
}

/// Runs replication `rep_index` and returns the finalized per-delta samples
/// themselves (for studies of the extracted statistics rather than the
/// estimates).
pub fn run_trial_samples(
    config: &TrialConfig,
    master_seed: u64,
    rep_index: u64,
) -> Result<Vec<GeometricRecordSample>> {
    let mut rng = replication_rng(master_seed, rep_index);
    Ok(stream_trial(config, &mut rng)?.samples)
}

// =============================================================
// Replication and aggregation
// =============================================================

/// Aggregated results of one estimator cell across replications.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    /// `"geometric"`, `"hill"`, `"berred_b1"` or `"berred_b2"`.
    pub estimator: String,
    /// The cell's tuning knob: `delta`, `k` or `ell`.
    pub param: f64,
    /// Mean estimate over the replications that produced one.
    pub mean: f64,
    /// Mean squared error against the true tail index.
    pub mse: f64,
    /// Lower median of the effective sampling sizes (absent for the
    /// record-only baselines, which use exactly the records).
    pub median_ess: Option<u64>,
    /// Replications that produced no estimate for this cell (stream aborts
    /// included).
    pub failures: u64,
}

/// Aggregated results of a replicated trial.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    /// Display form of the parent distribution.
    pub dist: String,
    /// True tail index the MSE is measured against.
    pub gamma: f64,
    /// Replications configured.
    pub reps: u64,
    /// Streams that exceeded the raw-observation budget.
    pub aborted: u64,
    pub rows: Vec<SummaryRow>,
}

impl SimulationSummary {
    /// Renders the summary as CSV with header
    /// `dist,gamma,estimator,param,mean,mse,median_ess,reps,failures`.
    pub fn to_csv(&self) -> String {
        // Distribution strings carry commas ("pareto:2,1"), so the field
        // is quoted whenever needed to keep the output valid CSV.
        let dist = if self.dist.contains(',') || self.dist.contains('"') {
            format!("\"{}\"", self.dist.replace('"', "\"\""))
        } else {
            self.dist.clone()
        };
        let mut out = String::from("dist,gamma,estimator,param,mean,mse,median_ess,reps,failures\n");
        for row in &self.rows {
            let ess = row
                .median_ess
                .map(|e| e.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                dist,
                self.gamma,
                row.estimator,
                row.param,
                row.mean,
                row.mse,
                ess,
                self.reps,
                row.failures
            ));
        }
        out
    }

    /// Looks up a cell by estimator name and parameter.
    pub fn cell(&self, estimator: &str, param: f64) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.estimator == estimator && (r.param - param).abs() < 1e-12)
    }
}

/// Lower median: the element at index `(len - 1) / 2` of the sorted values.
fn lower_median(values: &mut [u64]) -> Option<u64> {
    if values.is_empty() {
        return None;
    }
    values.sort_unstable();
    Some(values[(values.len() - 1) / 2])
}

fn summarize_cell(
    estimator: &str,
    param: f64,
    gamma_true: f64,
    estimates: &[f64],
    esses: Option<&mut [u64]>,
    reps: u64,
) -> SummaryRow {
    let used = estimates.len() as u64;
    let (mean, mse) = if estimates.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let mean = estimates.iter().sum::<f64>() / used as f64;
        let mse = estimates
            .iter()
            .map(|&g| (g - gamma_true) * (g - gamma_true))
            .sum::<f64>()
            / used as f64;
        (mean, mse)
    };
    SummaryRow {
        estimator: estimator.to_string(),
        param,
        mean,
        mse,
        median_ess: esses.and_then(|e| lower_median(e)),
        failures: reps - used,
    }
}

/// Runs `reps` independent replications of a trial (in parallel) and
/// aggregates them per estimator cell. Replication `i` always uses
/// [`replication_rng`]`(master_seed, i)`, so the summary does not depend on
/// thread count. Aborted streams are excluded from every cell's moments and
/// show up in the failure counts.
pub fn replicate(config: &TrialConfig, reps: u64, master_seed: u64) -> Result<SimulationSummary> {
    config.validate()?;
    if reps == 0 {
        return Err(Error::InvalidParameter(
            "at least one replication is required".into(),
        ));
    }
    let outputs: Vec<Result<TrialOutput>> = (0..reps)
        .into_par_iter()
        .map(|i| run_trial(config, master_seed, i))
        .collect();

    let mut aborted = 0u64;
    let mut ok = Vec::with_capacity(outputs.len());
    for out in outputs {
        match out {
            Ok(o) => ok.push(o),
            Err(Error::TrialAborted { .. }) => aborted += 1,
            Err(e) => return Err(e),
        }
    }

    let gamma_true = config.dist.tail_index();
    let mut rows = Vec::new();

    for (i, &delta) in config.deltas.iter().enumerate() {
        let estimates: Vec<f64> = ok.iter().map(|o| o.geometric[i].gamma_hat).collect();
        let mut esses: Vec<u64> = ok.iter().map(|o| o.geometric[i].ess).collect();
        rows.push(summarize_cell(
            "geometric",
            delta,
            gamma_true,
            &estimates,
            Some(&mut esses),
            reps,
        ));
    }
    for (i, &k) in config.hill_ks.iter().enumerate() {
        let estimates: Vec<f64> = ok
            .iter()
            .filter_map(|o| o.hill[i].gamma_hat)
            .collect();
        let mut esses: Vec<u64> = ok.iter().map(|o| o.hill[i].ess).collect();
        rows.push(summarize_cell(
            "hill",
            k as f64,
            gamma_true,
            &estimates,
            Some(&mut esses),
            reps,
        ));
    }
    for (i, &ell) in config.berred_ells.iter().enumerate() {
        let b1: Vec<f64> = ok.iter().filter_map(|o| o.berred_b1[i].1).collect();
        rows.push(summarize_cell(
            "berred_b1",
            ell as f64,
            gamma_true,
            &b1,
            None,
            reps,
        ));
    }
    for (i, &ell) in config.berred_ells.iter().enumerate() {
        let b2: Vec<f64> = ok.iter().filter_map(|o| o.berred_b2[i].1).collect();
        rows.push(summarize_cell(
            "berred_b2",
            ell as f64,
            gamma_true,
            &b2,
            None,
            reps,
        ));
    }

    Ok(SimulationSummary {
        dist: config.dist.to_string(),
        gamma: gamma_true,
        reps,
        aborted,
        rows,
    })
}

// =============================================================
// CLT study
// =============================================================

/// Outcome of a block-normalized CLT check.
#[derive(Debug, Clone, Serialize)]
pub struct CltReport {
    pub gamma: f64,
    pub delta: f64,
    pub m: u32,
    pub n_blocks: usize,
    pub reps: u64,
    pub alpha: f64,
    /// Sample standard deviation of `sqrt(n) * (gamma_hat - gamma)`.
    pub empirical_sd: f64,
    /// The model's asymptotic standard deviation at the true index.
    pub theoretical_sd: f64,
    /// Fraction of replications whose `(1 - alpha)` interval covered the
    /// true index.
    pub coverage: f64,
}

impl CltReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

/// Draws `reps` samples of `n_blocks` complete blocks directly from the
/// reduced-statistic laws, estimates each, and summarizes the normalized
/// errors and the confidence-interval coverage at level `alpha`.
pub fn clt_study(
    gamma: f64,
    delta: f64,
    m: u32,
    n_blocks: usize,
    reps: u64,
    alpha: f64,
    master_seed: u64,
) -> Result<CltReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter(
            "a CLT study needs at least two replications".into(),
        ));
    }
    let params = GeomRecordParams::new(delta, m, 0.0)?;
    let results: Vec<Result<(f64, bool)>> = (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = replication_rng(master_seed, i);
            let sample = direct_generate_sample(gamma, params, n_blocks, &mut rng)?;
            let report: EstimateReport = mle_complete(&sample)?.with_confidence(alpha)?;
            let (low, high) = report.ci.expect("interval just attached");
            Ok((report.gamma_hat, low <= gamma && gamma <= high))
        })
        .collect();

    let mut errors = Vec::with_capacity(reps as usize);
    let mut covered = 0u64;
    let sqrt_n = (n_blocks as f64).sqrt();
    for r in results {
        let (gamma_hat, inside) = r?;
        errors.push(sqrt_n * (gamma_hat - gamma));
        if inside {
            covered += 1;
        }
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let var = errors
        .iter()
        .map(|e| (e - mean) * (e - mean))
        .sum::<f64>()
        / (errors.len() - 1) as f64;

    Ok(CltReport {
        gamma,
        delta,
        m,
        n_blocks,
        reps,
        alpha,
        empirical_sd: var.sqrt(),
        theoretical_sd: crate::estimators::asymptotic_sd(gamma, delta, m)?,
        coverage: covered as f64 / reps as f64,
    })
}

// =============================================================
// Estimate-vs-usage traces
// =============================================================

/// One point of an estimate trace: the estimate after the estimator's
/// `ess`-th consumed observation.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TracePoint {
    pub ess: u64,
    pub estimate: f64,
}

/// Parallel traces of the geometric-record estimate and a Hill estimate over
/// one finite stream.
#[derive(Debug, Clone, Serialize)]
pub struct TraceReport {
    pub geometric: Vec<TracePoint>,
    pub hill: Vec<TracePoint>,
}

impl TraceReport {
    /// Renders the traces as CSV with header `estimator,ess,estimate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("estimator,ess,estimate\n");
        for p in &self.geometric {
            out.push_str(&format!("geometric,{},{}\n", p.ess, p.estimate));
        }
        for p in &self.hill {
            out.push_str(&format!("hill,{},{}\n", p.ess, p.estimate));
        }
        out
    }
}

/// Feeds `n_raw` observations from the parent through both estimators and
/// records how each estimate evolves *per observation the estimator
/// consumes*: the geometric trace gains a point at every record or
/// near-record (once the practical-variant estimate exists), the Hill trace
/// at every observation that enters the running top `k + 1` (once `k + 1`
/// observations have arrived).
pub fn trace_paths(
    dist: &ParentDistribution,
    n_raw: u64,
    params: GeomRecordParams,
    hill_k: usize,
    master_seed: u64,
) -> Result<TraceReport> {
    dist.validate()?;
    if hill_k == 0 {
        return Err(Error::InvalidParameter("hill level must be >= 1".into()));
    }
    let mut rng = replication_rng(master_seed, 0);
    let mut extractor = Extractor::new(params);
    let mut tracker = HillTracker::new(&[hill_k])?;
    let mut geometric = Vec::new();
    let mut hill_trace = Vec::new();
    let mut sample_snapshot = SampleSums::default();

    for _ in 0..n_raw {
        let x = dist.sample(&mut rng);
        let before = tracker.measured(hill_k)?;

        if x > params.threshold_a() || extractor.is_activated() {
            let event = extractor.push(x)?;
            if sample_snapshot.apply(&event) {
                if let Some(gamma) = sample_snapshot.practical_gamma(&params) {
                    geometric.push(TracePoint {
                        ess: sample_snapshot.ess(),
                        estimate: gamma,
                    });
                }
            }
            // Hill shares the post-activation stream with the extractor.
            tracker.push(x)?;
            if tracker.measured(hill_k)? > before {
                if let Ok(est) = tracker.hill_at(hill_k) {
                    hill_trace.push(TracePoint {
                        ess: tracker.measured(hill_k)?,
                        estimate: est,
                    });
                }
            }
        }
    }

    Ok(TraceReport {
        geometric,
        hill: hill_trace,
    })
}

/// Running sufficient statistics maintained from push events, mirroring the
/// practical-variant estimate without cloning the extractor.
#[derive(Debug, Default)]
struct SampleSums {
    n: u64,
    sum_k: u64,
    sum_s: u64,
    sum_v: u64,
}

impl SampleSums {
    /// Folds one event in; returns whether it was a geometric record
    /// (a record or near-record).
    fn apply(&mut self, event: &PushEvent) -> bool {
        match *event {
            PushEvent::Activated { k_index } => {
                self.n = 1;
                self.sum_k = u64::from(k_index);
                true
            }
            PushEvent::NewRecord { k_index } => {
                self.n += 1;
                self.sum_k += u64::from(k_index);
                true
            }
            PushEvent::NearRecord { v_index } => {
                self.sum_s += 1;
                self.sum_v += u64::from(v_index);
                true
            }
            PushEvent::Ignored | PushEvent::BelowGeometricThreshold => false,
        }
    }

    fn ess(&self) -> u64 {
        self.n + self.sum_s
    }

    /// The practical-variant estimate, when it exists.
    fn practical_gamma(&self, params: &GeomRecordParams) -> Option<f64> {
        if self.n == 0 {
            return None;
        }
        let m = f64::from(params.m());
        let n = self.n as f64;
        let extra = (self.sum_v + self.sum_k) as f64;
        let numerator = m * (n - 1.0) + extra;
        if numerator <= 0.0 {
            return None;
        }
        let denominator = (m + 1.0) * n - m + extra + self.sum_s as f64;
        let beta = numerator / denominator;
        Some(f64::from(params.m()) * beta.ln() / params.delta().ln())
    }
}

// =============================================================
// Tests
// =============================================================
