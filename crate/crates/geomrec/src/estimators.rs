//! Tail-index estimators.
//!
//! The main estimator works on a [`GeometricRecordSample`]: with `n` blocks,
//! jump indices `K_i`, near-record counts `S_i` and subinterval indices
//! `V_ij`, the likelihood of the reduced data is a product of geometric
//! laws in `beta = delta^(gamma/m)`, and the maximizer is available in
//! closed form. Two variants are provided:
//!
//! - [`mle_complete`] uses only the complete blocks (a trailing incomplete
//!   block is silently dropped):
//!   `beta_hat = (m n + sum V + sum K) / ((m+1) n + sum V + sum K + sum S)`.
//! - [`mle_practical`] uses everything observed, including the open final
//!   block, at the cost of an existence condition:
//!   `beta_hat = (m (n-1) + sum V + sum K) / ((m+1) n - m + sum V + sum K + sum S)`.
//!
//! Either way `gamma_hat = m * log_delta(beta_hat)`.
//!
//! For comparison the module also implements the Hill estimator (batch form
//! plus a streaming top-list tracker that measures how many observations the
//! estimator actually consumes) and two estimators that use record values
//! only.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::records::{GeometricRecordSample, SufficientStats};

// =============================================================
// Reports
// =============================================================

/// Which block-usage convention produced an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Complete blocks only.
    Complete,
    /// All observed blocks, final one possibly still open.
    Practical,
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Variant::Complete => f.write_str("complete"),
            Variant::Practical => f.write_str("practical"),
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(Variant::Complete),
            "practical" => Ok(Variant::Practical),
            other => Err(Error::Parse(format!(
                "unknown estimator variant {other:?}, expected \"complete\" or \"practical\""
            ))),
        }
    }
}

/// A tail-index estimate with its uncertainty summary.
#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    /// Point estimate of the tail index.
    pub gamma_hat: f64,
    /// Plug-in asymptotic standard deviation at `gamma_hat`.
    pub sigma_hat: f64,
    /// Two-sided confidence interval, once attached via
    /// [`EstimateReport::with_confidence`].
    pub ci: Option<(f64, f64)>,
    /// Significance level of `ci`.
    pub alpha: Option<f64>,
    /// Number of blocks the estimate used.
    pub n_blocks: usize,
    /// Geometric records consumed by the estimate (records + near-records).
    pub ess: u64,
    /// Block-usage convention.
    pub variant: Variant,
}

impl EstimateReport {
    /// Attaches a two-sided confidence interval at significance `alpha`.
    pub fn with_confidence(mut self, alpha: f64) -> Result<Self> {
        let (low, high) =
            confidence_interval(self.gamma_hat, self.sigma_hat, self.n_blocks, alpha)?;
        self.ci = Some((low, high));
        self.alpha = Some(alpha);
        Ok(self)
    }

    /// Serializes the report as a JSON document with fields `gamma_hat`,
    /// `sigma_hat`, `ci`, `alpha`, `n_blocks`, `ess` and `variant`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialization cannot fail")
    }
}

// =============================================================
// Geometric-record MLE
// =============================================================

fn gamma_from_beta(beta: f64, delta: f64, m: u32) -> f64 {
    f64::from(m) * beta.ln() / delta.ln()
}

fn build_report(
    sample: &GeometricRecordSample,
    stats: &SufficientStats,
    beta: f64,
    variant: Variant,
) -> EstimateReport {
    let delta = sample.params().delta();
    let m = sample.params().m();
    let gamma_hat = gamma_from_beta(beta, delta, m);
    EstimateReport {
        gamma_hat,
        sigma_hat: asymptotic_sd(gamma_hat, delta, m).expect("estimate is in-domain"),
        ci: None,
        alpha: None,
        n_blocks: stats.n,
        ess: GeometricRecordSample::effective_sampling_size(stats),
        variant,
    }
}

/// Maximum-likelihood estimate from the complete blocks of a sample.
///
/// A trailing incomplete block is dropped. Errors with
/// [`Error::EmptySample`] when no complete block remains. The returned
/// `beta_hat` implied by the estimate always lies strictly inside `(0, 1)`,
/// so `gamma_hat` is finite and positive.
pub fn mle_complete(sample: &GeometricRecordSample) -> Result<EstimateReport> {
    let stats = sample.complete_stats();
    if stats.n == 0 {
        return Err(Error::EmptySample(
            "the sample holds no complete block; estimate needs at least one".into(),
        ));
    }
    let m = f64::from(sample.params().m());
    let n = stats.n as f64;
    let extra = (stats.sum_v + stats.sum_k) as f64;
    let numerator = m * n + extra;
    let denominator = (m + 1.0) * n + extra + stats.sum_s as f64;
    Ok(build_report(
        sample,
        &stats,
        numerator / denominator,
        Variant::Complete,
    ))
}

/// Maximum-likelihood estimate from everything observed, including the open
/// final block.
///
/// The estimate exists when `n >= 2`, or when `n == 1` and the first block
/// already carries some information (`K_1 + sum V > 0`); otherwise the
/// likelihood has no interior maximizer and [`Error::MleNonexistent`] is
/// returned.
pub fn mle_practical(sample: &GeometricRecordSample) -> Result<EstimateReport> {
    let stats = sample.observed_stats();
    let m = f64::from(sample.params().m());
    let n = stats.n as f64;
    let extra = (stats.sum_v + stats.sum_k) as f64;
    let numerator = m * (n - 1.0) + extra;
    if numerator <= 0.0 {
        return Err(Error::MleNonexistent(
            "a single block with zero jump index and no near-records \
             leaves the likelihood without an interior maximum"
                .into(),
        ));
    }
    let denominator = (m + 1.0) * n - m + extra + stats.sum_s as f64;
    Ok(build_report(
        sample,
        &stats,
        numerator / denominator,
        Variant::Practical,
    ))
}

// =============================================================
// Asymptotic standard deviation and confidence intervals
// =============================================================

/// Asymptotic standard deviation of the block-normalized estimator:
///
/// `sigma = m (1 - delta^(gamma/m)) delta^((gamma/2)(1 - 1/m)) / (-ln delta)`
///
/// It satisfies `gamma * delta^(gamma/2) < sigma < gamma`, decreases
/// strictly in `m` and increases in `delta`.
pub fn asymptotic_sd(gamma: f64, delta: f64, m: u32) -> Result<f64> {
    if !gamma.is_finite() || gamma <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "gamma must be positive and finite, got {gamma}"
        )));
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "delta must lie strictly between 0 and 1, got {delta}"
        )));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "m must be at least 2, got {m}"
        )));
    }
    let m = f64::from(m);
    let scale = delta.powf((gamma / 2.0) * (1.0 - 1.0 / m));
    Ok(m * (1.0 - delta.powf(gamma / m)) * scale / (-delta.ln()))
}

/// Two-sided confidence interval `gamma_hat +- z_(1-alpha/2) sigma_hat / sqrt(n)`.
///
/// `alpha` must lie in `(0, 1]`; `alpha = 1` collapses the interval to the
/// point estimate.
pub fn confidence_interval(
    gamma_hat: f64,
    sigma_hat: f64,
    n_blocks: usize,
    alpha: f64,
) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    if n_blocks == 0 {
        return Err(Error::InvalidParameter(
            "confidence interval needs at least one block".into(),
        ));
    }
    if !sigma_hat.is_finite() || sigma_hat <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "sigma_hat must be positive and finite, got {sigma_hat}"
        )));
    }
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let half = z * sigma_hat / (n_blocks as f64).sqrt();
    Ok((gamma_hat - half, gamma_hat + half))
}

/// Standard normal quantile via the Acklam rational approximation
/// (absolute error below `1.2e-8` throughout the open unit interval).
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "quantile probability must lie strictly in (0, 1), got {p}"
        )));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    Ok(x)
}

// =============================================================
// Hill estimator
// =============================================================

/// Hill estimator from the top `k + 1` order statistics.
///
/// `top` must hold exactly `k + 1` positive values in non-increasing order
/// (largest first). Errors with [`Error::Degenerate`] when all of them are
/// equal, which makes the log-spacings vanish.
pub fn hill(top: &[f64], k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("hill requires k >= 1".into()));
    }
    if top.len() != k + 1 {
        return Err(Error::InvalidParameter(format!(
            "hill with k = {k} needs exactly {} order statistics, got {}",
            k + 1,
            top.len()
        )));
    }
    if top.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::Domain(
            "hill order statistics must be positive finite numbers".into(),
        ));
    }
    if top.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter(
            "hill order statistics must be non-increasing".into(),
        ));
    }
    let floor = top[k];
    let sum: f64 = top[..k].iter().map(|&x| (x / floor).ln()).sum();
    if sum <= 0.0 {
        return Err(Error::Degenerate(
            "all top order statistics are equal; hill estimate is undefined".into(),
        ));
    }
    Ok(k as f64 / sum)
}

/// Hill estimator computed from a full sample: sorts a copy and applies
/// [`hill`] to the top `k + 1` values.
pub fn hill_from_sample(values: &[f64], k: usize) -> Result<f64> {
    if values.len() < k + 1 {
        return Err(Error::InsufficientData(format!(
            "hill with k = {k} needs at least {} values, got {}",
            k + 1,
            values.len()
        )));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    hill(&sorted[..=k], k)
}

/// Streaming top-list for Hill estimates at several `k` values at once,
/// tracking how many arriving observations each `k` actually consumes.
///
/// An observation is *measured* at level `k` when, at its arrival, it ranks
/// within the running top `k + 1` of everything seen so far (before the top
/// list is full, every arrival counts). The per-level totals are the Hill
/// analogue of the geometric estimator's effective sampling size.
#[derive(Debug, Clone)]
pub struct HillTracker {
    ks: Vec<usize>,
    capacity: usize,
    ascending: Vec<f64>,
    entries: Vec<u64>,
    seen: u64,
}

impl HillTracker {
    /// Builds a tracker for the given Hill levels (each `>= 1`).
    pub fn new(ks: &[usize]) -> Result<Self> {
        if ks.is_empty() {
            return Err(Error::InvalidParameter(
                "hill tracker needs at least one k level".into(),
            ));
        }
        if ks.iter().any(|&k| k == 0) {
            return Err(Error::InvalidParameter(
                "hill tracker levels must satisfy k >= 1".into(),
            ));
        }
        let capacity = ks.iter().max().copied().unwrap_or(1) + 1;
        Ok(Self {
            ks: ks.to_vec(),
            capacity,
            ascending: Vec::with_capacity(capacity + 1),
            entries: vec![0; ks.len()],
            seen: 0,
        })
    }

    /// Tracked Hill levels, in construction order.
    pub fn levels(&self) -> &[usize] {
        &self.ks
    }

    /// Total observations pushed.
    pub fn seen(&self) -> u64 {
        self.seen
    }

    /// Current size of the retained top list.
    pub fn len(&self) -> usize {
        self.ascending.len()
    }

    /// Whether nothing has been pushed yet.
    pub fn is_empty(&self) -> bool {
        self.ascending.is_empty()
    }

    /// Smallest retained value, once the top list is at capacity. This is
    /// the threshold below which arrivals cannot matter for any level.
    pub fn floor(&self) -> Option<f64> {
        if self.ascending.len() == self.capacity {
            self.ascending.first().copied()
        } else {
            None
        }
    }

    /// Feeds one observation, updating the top list and the per-level
    /// measurement counts.
    pub fn push(&mut self, x: f64) -> Result<()> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain(format!(
                "observations must be positive finite numbers, got {x}"
            )));
        }
        self.seen += 1;
        let len = self.ascending.len();
        for (slot, &k) in self.entries.iter_mut().zip(&self.ks) {
            // Measured at level k iff within the running top k+1 on arrival.
            if len < k + 1 || x > self.ascending[len - (k + 1)] {
                *slot += 1;
            }
        }
        let pos = self.ascending.partition_point(|&y| y < x);
        self.ascending.insert(pos, x);
        if self.ascending.len() > self.capacity {
            self.ascending.remove(0);
        }
        Ok(())
    }

    /// Observations measured at level `k` so far.
    pub fn measured(&self, k: usize) -> Result<u64> {
        self.ks
            .iter()
            .position(|&kk| kk == k)
            .map(|i| self.entries[i])
            .ok_or_else(|| {
                Error::InvalidParameter(format!("level k = {k} is not tracked by this tracker"))
            })
    }

    /// Hill estimate at level `k` from the current top list. Needs at least
    /// `k + 1` retained values.
    pub fn hill_at(&self, k: usize) -> Result<f64> {
        let len = self.ascending.len();
        if len < k + 1 {
            return Err(Error::InsufficientData(format!(
                "hill at k = {k} needs {} observations, seen only {len}",
                k + 1
            )));
        }
        let mut top: Vec<f64> = self.ascending[len - (k + 1)..].to_vec();
        top.reverse();
        hill(&top, k)
    }
}

// =============================================================
// Record-only baselines
// =============================================================

/// Record-spacing estimator: `ell / ln(R_n / R_(n-ell))`.
///
/// `records` holds the record values in occurrence order; the estimator uses
/// the `n`-th and the `(n-ell)`-th. Requires `1 <= ell < n <= records.len()`.
pub fn berred_b1(records: &[f64], ell: usize, n: usize) -> Result<f64> {
    if ell == 0 || ell >= n {
        return Err(Error::InvalidParameter(format!(
            "requires 1 <= ell < n, got ell = {ell}, n = {n}"
        )));
    }
    if records.len() < n {
        return Err(Error::InsufficientData(format!(
            "needs {n} records, got {}",
            records.len()
        )));
    }
    let r_n = records[n - 1];
    let r_lag = records[n - 1 - ell];
    if !(r_n > 0.0 && r_lag > 0.0) {
        return Err(Error::Domain("record values must be positive".into()));
    }
    if r_n <= r_lag {
        return Err(Error::Degenerate(format!(
            "record values must strictly increase, got R_{n} = {r_n} after {r_lag}"
        )));
    }
    Ok(ell as f64 / (r_n / r_lag).ln())
}

/// Record-sum estimator: `[(n ell - ell (ell - 1) / 2)^(-1) * sum of
/// ln R_(n-i+1), i = 1..ell]^(-1)`.
///
/// Unlike [`berred_b1`] this is not scale invariant: it presumes the records
/// are measured on the scale where the tail survival is asymptotically
/// `x^(-gamma)` with unit scale constant. A non-positive log-sum (records at
/// or below 1) makes the estimate undefined.
pub fn berred_b2(records: &[f64], ell: usize, n: usize) -> Result<f64> {
    if ell == 0 || ell > n {
        return Err(Error::InvalidParameter(format!(
            "requires 1 <= ell <= n, got ell = {ell}, n = {n}"
        )));
    }
    if records.len() < n {
        return Err(Error::InsufficientData(format!(
            "needs {n} records, got {}",
            records.len()
        )));
    }
    let tail = &records[n - ell..n];
    if tail.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::Domain("record values must be positive".into()));
    }
    let log_sum: f64 = tail.iter().map(|&r| r.ln()).sum();
    if log_sum <= 0.0 {
        return Err(Error::Degenerate(
            "sum of log-records is non-positive; the record-sum estimate is undefined".into(),
        ));
    }
    let weight = (n * ell - ell * (ell - 1) / 2) as f64;
    Ok(weight / log_sum)
}

// =============================================================
// Tests
// =============================================================
