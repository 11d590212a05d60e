//! Streaming extraction of discretized geometric-record summaries.
//!
//! An [`Extractor`] consumes positive observations one at a time. The first
//! observation exceeding the activation threshold `A` becomes the first
//! record. From then on, each incoming `x` is compared against the current
//! record value `R`:
//!
//! - `x > R`: `x` is a new record. The multiplicative jump `x / R` is
//!   discretized on the geometric lattice with ratio `a = delta^(-1/m)`,
//!   giving the jump index `k = max(0, ceil(log_a(x / R)) - 1)`.
//! - `delta * R < x <= R`: `x` is a near-record. The window
//!   `(delta * R, R]` is split into `m` geometric subintervals
//!   `(a^v * delta * R, a^(v+1) * delta * R]`, and `x` is reduced to its
//!   subinterval index `v` in `0..m`.
//! - `x <= delta * R`: the observation is below the geometric window and
//!   contributes nothing.
//!
//! Values landing exactly on a lattice boundary resolve downward (into the
//! lower cell), which is what the `ceil(..) - 1` form computes. A value tied
//! with the current record (`x == R`) is a near-record in the top subinterval
//! `v = m - 1`.
//!
//! Each record opens a [`RecordBlock`] that accumulates the near-records seen
//! until the next record arrives; the next record closes ("completes") the
//! block. The final block of a finished stream is typically incomplete.

use std::io::BufRead;

use serde::Serialize;

use crate::error::{Error, Result};

// =============================================================
// Parameters
// =============================================================

/// Discretization parameters shared by extraction and estimation.
///
/// `delta` is the relative width of the near-record window, `m >= 2` the
/// number of geometric subintervals it is split into, and `threshold_a >= 0`
/// the activation threshold: observations are ignored until one exceeds it.
///
/// The lattice ratio `a = delta^(-1/m)` satisfies `a^m * delta = 1`; the
/// constructor verifies this identity to within `1e-12` relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomRecordParams {
    delta: f64,
    m: u32,
    threshold_a: f64,
    ln_a: f64,
}

impl GeomRecordParams {
    /// Validates and builds a parameter set.
    pub fn new(delta: f64, m: u32, threshold_a: f64) -> Result<Self> {
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
        if !threshold_a.is_finite() || threshold_a < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "activation threshold must be finite and non-negative, got {threshold_a}"
            )));
        }
        let ln_a = -delta.ln() / f64::from(m);
        let a = delta.powf(-1.0 / f64::from(m));
        let identity = a.powi(m as i32) * delta;
        if (identity - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "lattice identity a^m * delta = 1 violated: got {identity}"
            )));
        }
        Ok(Self {
            delta,
            m,
            threshold_a,
            ln_a,
        })
    }

    /// Relative width of the near-record window.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of geometric subintervals the window is split into.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Activation threshold.
    pub fn threshold_a(&self) -> f64 {
        self.threshold_a
    }

    /// Lattice ratio `a = delta^(-1/m)`.
    pub fn lattice_ratio(&self) -> f64 {
        self.delta.powf(-1.0 / f64::from(self.m))
    }

    /// Natural log of the lattice ratio, `-ln(delta) / m`.
    pub fn ln_lattice_ratio(&self) -> f64 {
        self.ln_a
    }

    /// Lattice index of a ratio `> 1`: `max(0, ceil(log_a(ratio)) - 1)`.
    ///
    /// This is the jump index of a record with multiplicative growth `ratio`,
    /// and also the raw subinterval index of a near-record when `ratio` is
    /// taken relative to the bottom of the window.
    fn lattice_index(&self, ratio: f64) -> i64 {
        let raw = (ratio.ln() / self.ln_a).ceil() as i64 - 1;
        raw.max(0)
    }
}

// =============================================================
// Blocks and samples
// =============================================================

/// One record together with the near-records observed while it was the
/// running maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordBlock {
    /// The record value that opened this block.
    pub record_value: f64,
    /// Discretized jump index of this record relative to its predecessor
    /// (relative to the activation threshold for the first block).
    pub k_index: u32,
    /// Subinterval indices of the near-records in this block, in arrival
    /// order; each lies in `0..m`.
    pub v_indices: Vec<u32>,
    /// Whether a subsequent record has closed this block.
    pub complete: bool,
}

impl RecordBlock {
    /// Number of near-records in this block.
    pub fn near_record_count(&self) -> usize {
        self.v_indices.len()
    }

    /// Sum of the subinterval indices in this block.
    pub fn sum_v(&self) -> u64 {
        self.v_indices.iter().map(|&v| u64::from(v)).sum()
    }
}

/// Sufficient statistics accumulated over a set of blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SufficientStats {
    /// Number of blocks covered.
    pub n: usize,
    /// Sum of jump indices.
    pub sum_k: u64,
    /// Total number of near-records.
    pub sum_s: u64,
    /// Sum of all subinterval indices.
    pub sum_v: u64,
}

impl SufficientStats {
    fn accumulate(blocks: &[RecordBlock]) -> Self {
        let mut out = Self {
            n: blocks.len(),
            ..Self::default()
        };
        for b in blocks {
            out.sum_k += u64::from(b.k_index);
            out.sum_s += b.near_record_count() as u64;
            out.sum_v += b.sum_v();
        }
        out
    }
}

/// A finished extraction: the ordered record blocks plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricRecordSample {
    params: GeomRecordParams,
    blocks: Vec<RecordBlock>,
    raw_count: u64,
}

#[derive(Serialize)]
struct BlockJson<'a> {
    r: f64,
    k: u32,
    s: usize,
    v: &'a [u32],
}

#[derive(Serialize)]
struct SampleJson<'a> {
    delta: f64,
    m: u32,
    #[serde(rename = "A")]
    threshold_a: f64,
    blocks: Vec<BlockJson<'a>>,
    raw_count: u64,
}

impl GeometricRecordSample {
    /// Assembles a sample from explicit blocks, validating its invariants:
    /// at least one block, strictly increasing record values all above the
    /// activation threshold, subinterval indices below `m`, only the final
    /// block may be incomplete, and the raw count covers every retained
    /// observation.
    pub fn from_blocks(
        params: GeomRecordParams,
        blocks: Vec<RecordBlock>,
        raw_count: u64,
    ) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::EmptySample(
                "a sample requires at least one record block".into(),
            ));
        }
        let mut prev = params.threshold_a();
        let mut retained = 0u64;
        for (i, b) in blocks.iter().enumerate() {
            if !b.record_value.is_finite() || b.record_value <= prev {
                return Err(Error::InvalidParameter(format!(
                    "record values must strictly increase above the threshold; \
                     block {i} has value {} after {prev}",
                    b.record_value
                )));
            }
            prev = b.record_value;
            if b.v_indices.iter().any(|&v| v >= params.m()) {
                return Err(Error::InvalidParameter(format!(
                    "block {i} holds a subinterval index >= m = {}",
                    params.m()
                )));
            }
            if !b.complete && i + 1 != blocks.len() {
                return Err(Error::InvalidParameter(format!(
                    "only the final block may be incomplete, block {i} is not"
                )));
            }
            retained += 1 + b.near_record_count() as u64;
        }
        if raw_count < retained {
            return Err(Error::InvalidParameter(format!(
                "raw_count {raw_count} is below the {retained} retained observations"
            )));
        }
        Ok(Self {
            params,
            blocks,
            raw_count,
        })
    }

    /// Extraction parameters this sample was produced with.
    pub fn params(&self) -> &GeomRecordParams {
        &self.params
    }

    /// All blocks in record order.
    pub fn blocks(&self) -> &[RecordBlock] {
        &self.blocks
    }

    /// Number of blocks, complete or not.
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Total number of observations consumed after activation (the
    /// activating observation counts as the first).
    pub fn raw_count(&self) -> u64 {
        self.raw_count
    }

    /// The complete blocks (all but a trailing incomplete one, if any).
    pub fn complete_blocks(&self) -> &[RecordBlock] {
        match self.blocks.last() {
            Some(last) if !last.complete => &self.blocks[..self.blocks.len() - 1],
            _ => &self.blocks,
        }
    }

    /// Sufficient statistics over the complete blocks only.
    pub fn complete_stats(&self) -> SufficientStats {
        SufficientStats::accumulate(self.complete_blocks())
    }

    /// Sufficient statistics over every block, including a trailing
    /// incomplete one.
    pub fn observed_stats(&self) -> SufficientStats {
        SufficientStats::accumulate(&self.blocks)
    }

    /// Effective sampling size of the geometric-record estimator: the number
    /// of geometric records (records plus near-records) among the blocks in
    /// `stats`, i.e. `n + sum of near-record counts`.
    pub fn effective_sampling_size(stats: &SufficientStats) -> u64 {
        stats.n as u64 + stats.sum_s
    }

    /// Serializes the sample to a self-describing JSON document with fields
    /// `delta`, `m`, `A`, `blocks` (each `{r, k, s, v}`) and `raw_count`.
    pub fn to_json(&self) -> String {
        let doc = SampleJson {
            delta: self.params.delta(),
            m: self.params.m(),
            threshold_a: self.params.threshold_a(),
            blocks: self
                .blocks
                .iter()
                .map(|b| BlockJson {
                    r: b.record_value,
                    k: b.k_index,
                    s: b.near_record_count(),
                    v: &b.v_indices,
                })
                .collect(),
            raw_count: self.raw_count,
        };
        serde_json::to_string(&doc).expect("sample serialization cannot fail")
    }
}

// =============================================================
// Streaming extractor
// =============================================================

/// Outcome of feeding one observation to an [`Extractor`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushEvent {
    /// Pre-activation observation at or below the threshold; discarded.
    Ignored,
    /// First observation above the threshold; it becomes the first record.
    /// Its jump index is measured from the threshold (zero when the
    /// threshold is zero).
    Activated { k_index: u32 },
    /// A new record with the given jump index.
    NewRecord { k_index: u32 },
    /// A near-record with the given subinterval index.
    NearRecord { v_index: u32 },
    /// At or below `delta * R`; retained in the raw count only.
    BelowGeometricThreshold,
}

/// Incremental extractor of geometric-record summaries.
#[derive(Debug, Clone)]
pub struct Extractor {
    params: GeomRecordParams,
    blocks: Vec<RecordBlock>,
    raw_count: u64,
}

impl Extractor {
    /// Builds an extractor for the given (already validated) parameters.
    pub fn new(params: GeomRecordParams) -> Self {
        Self {
            params,
            blocks: Vec::new(),
            raw_count: 0,
        }
    }

    /// Extraction parameters.
    pub fn params(&self) -> &GeomRecordParams {
        &self.params
    }

    /// Whether the first record has been seen.
    pub fn is_activated(&self) -> bool {
        !self.blocks.is_empty()
    }

    /// Current record value, if activated.
    pub fn current_max(&self) -> Option<f64> {
        self.blocks.last().map(|b| b.record_value)
    }

    /// Observations consumed since activation (activating one included).
    pub fn raw_count(&self) -> u64 {
        self.raw_count
    }

    /// Number of blocks opened so far.
    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Feeds one observation. Non-positive or non-finite values are domain
    /// errors. Observations arriving before activation and not exceeding the
    /// threshold are ignored entirely (not counted).
    pub fn push(&mut self, x: f64) -> Result<PushEvent> {
        if !x.is_finite() || x <= 0.0 {
            return Err(Error::Domain(format!(
                "observations must be positive finite numbers, got {x}"
            )));
        }
        let Some(current) = self.current_max() else {
            let a_thresh = self.params.threshold_a();
            if x <= a_thresh {
                return Ok(PushEvent::Ignored);
            }
            // First record: its jump index is measured from the threshold,
            // or fixed at zero when the threshold is zero.
            let k_index = if a_thresh > 0.0 {
                self.params.lattice_index(x / a_thresh) as u32
            } else {
                0
            };
            self.raw_count = 1;
            self.blocks.push(RecordBlock {
                record_value: x,
                k_index,
                v_indices: Vec::new(),
                complete: false,
            });
            return Ok(PushEvent::Activated { k_index });
        };

        self.raw_count += 1;
        if x > current {
            let k_index = self.params.lattice_index(x / current) as u32;
            if let Some(last) = self.blocks.last_mut() {
                last.complete = true;
            }
            self.blocks.push(RecordBlock {
                record_value: x,
                k_index,
                v_indices: Vec::new(),
                complete: false,
            });
            Ok(PushEvent::NewRecord { k_index })
        } else if x > self.params.delta() * current {
            // Subinterval index within the window (delta*R, R]. The clamp to
            // m-1 also settles the tie x == R, which belongs to the top cell.
            let raw = self
                .params
                .lattice_index(x / (self.params.delta() * current));
            let v_index = raw.min(i64::from(self.params.m()) - 1) as u32;
            // Debug reconstruction check: the stored index must place the
            // observation back inside its half-open lattice cell
            // (a^v * delta * R, a^{v+1} * delta * R], up to rounding slack.
            debug_assert!(
                {
                    let a = self.params.lattice_ratio();
                    let cell_low = a.powi(v_index as i32) * self.params.delta() * current;
                    let cell_high = a.powi(v_index as i32 + 1) * self.params.delta() * current;
                    x > cell_low * (1.0 - 1e-9) && x <= cell_high * (1.0 + 1e-9)
                },
                "near-record {x} escaped its reconstruction cell (v = {v_index})"
            );
            if let Some(last) = self.blocks.last_mut() {
                last.v_indices.push(v_index);
            }
            Ok(PushEvent::NearRecord { v_index })
        } else {
            Ok(PushEvent::BelowGeometricThreshold)
        }
    }

    /// Finishes the stream, returning the accumulated sample. Errors if no
    /// observation ever exceeded the activation threshold.
    pub fn finalize(self) -> Result<GeometricRecordSample> {
        if self.blocks.is_empty() {
            return Err(Error::NotActivated(format!(
                "no observation exceeded the activation threshold {}",
                self.params.threshold_a()
            )));
        }
        Ok(GeometricRecordSample {
            params: self.params,
            blocks: self.blocks,
            raw_count: self.raw_count,
        })
    }
}

// =============================================================
// Text input
// =============================================================

/// Reads a plain-text observation stream: one positive decimal number per
/// line. Blank lines and lines starting with `#` (after leading whitespace)
/// are ignored. Any other line must parse to a positive finite number.
pub fn read_observations<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let value: f64 = trimmed.parse().map_err(|_| {
            Error::Parse(format!(
                "line {}: expected a decimal number, got {trimmed:?}",
                idx + 1
            ))
        })?;
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::Parse(format!(
                "line {}: observations must be positive finite numbers, got {value}",
                idx + 1
            )));
        }
        out.push(value);
    }
    Ok(out)
}

// =============================================================
// Tests
// =============================================================
