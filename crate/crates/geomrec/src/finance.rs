//! Applying the estimator to financial price series.
//!
//! The pipeline mirrors common practice for tail analysis of returns:
//! prices become log-returns, the returns are standardized (centered and
//! scaled by the sample standard deviation), and their absolute values feed
//! the record extractor. Because the geometric-record reduction only ever
//! looks at ratios of observations to the running maximum, the analysis of
//! the standardized series is invariant to joint rescaling of the data and
//! the activation threshold.

use std::io::Read;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::mle_practical;
use crate::records::{Extractor, GeomRecordParams};

// =============================================================
// Prices and returns
// =============================================================

/// Log-returns of a price series, standardized for tail analysis.
#[derive(Debug, Clone)]
pub struct ReturnSeries {
    /// Label of each return (the label of the later of its two prices).
    pub labels: Vec<String>,
    /// Raw log-returns `ln x_t - ln x_(t-1)`.
    pub log_returns: Vec<f64>,
    /// Absolute standardized returns `|y_t - mean| / sd`.
    pub z_abs: Vec<f64>,
}

impl ReturnSeries {
    /// Renders the series as CSV with header `label,log_return,z_abs`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,log_return,z_abs\n");
        for i in 0..self.log_returns.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.labels[i], self.log_returns[i], self.z_abs[i]
            ));
        }
        out
    }
}

/// Reads a price CSV with a header row naming `date` and `close` columns
/// (in any order, other columns ignored). Rows whose close field does not
/// parse as a number are skipped; the count of skipped rows is returned
/// alongside the data so callers can warn about them.
pub fn read_prices_csv<R: Read>(reader: R) -> Result<(Vec<(String, f64)>, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse(format!("price CSV header: {e}")))?;
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse(format!("price CSV is missing a {name:?} column")))
    };
    let date_col = find("date")?;
    let close_col = find("close")?;

    let mut out = Vec::new();
    let mut skipped = 0usize;
    for row in rdr.records() {
        let row = row.map_err(|e| Error::Parse(format!("price CSV: {e}")))?;
        let date = row.get(date_col).unwrap_or("").to_string();
        match row.get(close_col).and_then(|s| s.parse::<f64>().ok()) {
            Some(close) => out.push((date, close)),
            None => skipped += 1,
        }
    }
    Ok((out, skipped))
}

/// Centers and scales by the sample standard deviation (denominator
/// `n - 1`). The operation is idempotent to floating-point accuracy:
/// standardizing an already standardized series changes nothing beyond
/// `~1e-10`.
pub fn standardize(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::InsufficientData(
            "standardization needs at least two values".into(),
        ));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values
        .iter()
        .map(|v| (v - mean) * (v - mean))
        .sum::<f64>()
        / (n - 1.0);
    if !(var > 0.0) {
        return Err(Error::Degenerate(
            "constant series cannot be standardized".into(),
        ));
    }
    let sd = var.sqrt();
    Ok(values.iter().map(|v| (v - mean) / sd).collect())
}

/// Turns a price series into standardized absolute log-returns.
///
/// Requires at least three prices (two returns), all positive and finite.
/// A constant return series (zero variance) is degenerate.
pub fn prices_to_returns(prices: &[(String, f64)]) -> Result<ReturnSeries> {
    if prices.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "need at least three prices to analyze returns, got {}",
            prices.len()
        )));
    }
    for (label, p) in prices {
        if !p.is_finite() || *p <= 0.0 {
            return Err(Error::Domain(format!(
                "prices must be positive finite numbers, got {p} at {label:?}"
            )));
        }
    }
    let log_returns: Vec<f64> = prices
        .windows(2)
        .map(|w| (w[1].1 / w[0].1).ln())
        .collect();
    let z = standardize(&log_returns)?;
    Ok(ReturnSeries {
        labels: prices[1..].iter().map(|(l, _)| l.clone()).collect(),
        log_returns,
        z_abs: z.into_iter().map(f64::abs).collect(),
    })
}

// =============================================================
// Empirical survival fit
// =============================================================

/// A log-log least-squares fit of the empirical survival function.
#[derive(Debug, Clone)]
pub struct EsfFit {
    /// Lower cutoff of the regression range.
    pub threshold: f64,
    /// Slope of `ln ESF` on `ln x`; `-slope` estimates the tail index.
    pub slope: f64,
    /// Intercept of the fit.
    pub intercept: f64,
    /// All plottable points `(ln x, ln ESF(x))` with positive `x` and
    /// positive survival, sorted by `x`.
    pub points: Vec<(f64, f64)>,
}

impl EsfFit {
    /// Serializes the fit parameters as JSON `{threshold, slope, intercept}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&serde_json::json!({
            "threshold": self.threshold,
            "slope": self.slope,
            "intercept": self.intercept,
        }))
        .expect("fit serialization cannot fail")
    }

    /// Renders the point cloud as CSV with header `log_x,log_esf`.
    pub fn points_csv(&self) -> String {
        let mut out = String::from("log_x,log_esf\n");
        for (x, y) in &self.points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }
}

/// Computes the empirical survival function `ESF(x) = #{z > x} / n` at the
/// sample points and fits `ln ESF` against `ln x` by ordinary least squares
/// over the points with `x >= threshold`. Points with zero survival (the
/// sample maximum) or non-positive `x` are dropped. At least ten points must
/// survive the threshold cut.
pub fn esf_fit(z_abs: &[f64], threshold: f64) -> Result<EsfFit> {
    if !(threshold > 0.0) || !threshold.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "threshold must be positive and finite, got {threshold}"
        )));
    }
    let mut sorted: Vec<f64> = z_abs
        .iter()
        .copied()
        .filter(|z| z.is_finite())
        .collect();
    if sorted.is_empty() {
        return Err(Error::InsufficientData("no finite observations".into()));
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;

    let mut points = Vec::new();
    let mut i = 0usize;
    while i < sorted.len() {
        let x = sorted[i];
        // Move past ties so each distinct value contributes one point.
        let mut j = i;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let greater = sorted.len() - j;
        if x > 0.0 && greater > 0 {
            points.push((x.ln(), (greater as f64 / n).ln()));
        }
        i = j;
    }

    let ln_threshold = threshold.ln();
    let fit_points: Vec<&(f64, f64)> = points.iter().filter(|(lx, _)| *lx >= ln_threshold).collect();
    if fit_points.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "only {} sample points at or above the threshold; at least 10 are needed",
            fit_points.len()
        )));
    }

    let k = fit_points.len() as f64;
    let mean_x = fit_points.iter().map(|(x, _)| x).sum::<f64>() / k;
    let mean_y = fit_points.iter().map(|(_, y)| y).sum::<f64>() / k;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in &fit_points {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if !(sxx > 0.0) {
        return Err(Error::Degenerate(
            "all regression points share one abscissa".into(),
        ));
    }
    let slope = sxy / sxx;
    Ok(EsfFit {
        threshold,
        slope,
        intercept: mean_y - slope * mean_x,
        points,
    })
}

// =============================================================
// Delta scan
// =============================================================

/// Result of estimating at one window width.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaScanRow {
    pub delta: f64,
    /// Absent when extraction never activated or the estimate does not
    /// exist at this width.
    pub gamma_hat: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    /// Blocks observed at this width (zero when never activated).
    pub n_blocks: usize,
}

/// A sensitivity scan over window widths.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaScanReport {
    pub rows: Vec<DeltaScanRow>,
}

impl DeltaScanReport {
    /// Renders the scan as CSV with header
    /// `delta,gamma_hat,ci_low,ci_high,n_blocks`; absent estimates leave
    /// their fields empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,gamma_hat,ci_low,ci_high,n_blocks\n");
        let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.delta,
                fmt(r.gamma_hat),
                fmt(r.ci_low),
                fmt(r.ci_high),
                r.n_blocks
            ));
        }
        out
    }
}

/// Runs the record extraction and the practical-variant estimate over a
/// grid of window widths, attaching a `(1 - alpha)` confidence interval at
/// each. Widths where the extraction never activates or where the estimate
/// does not exist produce a row without an estimate rather than an error.
/// Grid points are processed in parallel; zero observations (which carry no
/// tail information) are skipped.
pub fn delta_scan(
    z_abs: &[f64],
    grid: &[f64],
    m: u32,
    threshold_a: f64,
    alpha: f64,
) -> Result<DeltaScanReport> {
    let rows: Vec<Result<DeltaScanRow>> = grid
        .par_iter()
        .map(|&delta| {
            let params = GeomRecordParams::new(delta, m, threshold_a)?;
            let mut ex = Extractor::new(params);
            for &z in z_abs {
                if z > 0.0 && z.is_finite() {
                    ex.push(z)?;
                }
            }
            let sample = match ex.finalize() {
                Ok(s) => s,
                Err(Error::NotActivated(_)) => {
                    return Ok(DeltaScanRow {
                        delta,
                        gamma_hat: None,
                        ci_low: None,
                        ci_high: None,
                        n_blocks: 0,
                    })
                }
                Err(e) => return Err(e),
            };
            let n_blocks = sample.n_blocks();
            match mle_practical(&sample) {
                Ok(report) => {
                    let report = report.with_confidence(alpha)?;
                    let (low, high) = report.ci.expect("interval just attached");
                    Ok(DeltaScanRow {
                        delta,
                        gamma_hat: Some(report.gamma_hat),
                        ci_low: Some(low),
                        ci_high: Some(high),
                        n_blocks,
                    })
                }
                Err(Error::MleNonexistent(_)) => Ok(DeltaScanRow {
                    delta,
                    gamma_hat: None,
                    ci_low: None,
                    ci_high: None,
                    n_blocks,
                }),
                Err(e) => Err(e),
            }
        })
        .collect();
    Ok(DeltaScanReport {
        rows: rows.into_iter().collect::<Result<_>>()?,
    })
}

// =============================================================
// Tests
// =============================================================
