//! Heavy-tailed parent distributions and direct samplers for the reduced
//! record statistics.
//!
//! Every distribution here has a regularly varying upper tail,
//! `P(X > x) ~ c * x^(-gamma)`, so its tail index is a well-defined target
//! for the estimators. All samplers draw by inversion from a single uniform
//! (except the absolute Student t, which composes library normal and gamma
//! draws), which keeps replications reproducible under a seeded generator.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::records::{GeomRecordParams, GeometricRecordSample, RecordBlock};

// =============================================================
// Parent distributions
// =============================================================

/// A simulated data-generating distribution with tail index `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParentDistribution {
    /// Survival `(x / scale)^(-gamma)` for `x >= scale`.
    Pareto { gamma: f64, scale: f64 },
    /// CDF `exp(-x^(-gamma))` on `x > 0`.
    Frechet { gamma: f64 },
    /// CDF `x^gamma / (1 + x^gamma)` on `x > 0`.
    LogLogistic { gamma: f64 },
    /// Survival `(1 + x^(gamma/c))^(-c)` on `x > 0`.
    BurrXii { gamma: f64, c: f64 },
    /// CDF `(1 + x^(-gamma))^(-p)` on `x > 0`.
    Dagum { gamma: f64, p: f64 },
    /// Absolute value of a Student t variable with `gamma` degrees of
    /// freedom. No closed-form survival is exposed for it; it exists for
    /// robustness experiments.
    AbsStudentT { gamma: f64 },
}

impl ParentDistribution {
    /// Checks the shape parameters.
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        let fine = match *self {
            ParentDistribution::Pareto { gamma, scale } => ok(gamma) && ok(scale),
            ParentDistribution::Frechet { gamma } => ok(gamma),
            ParentDistribution::LogLogistic { gamma } => ok(gamma),
            ParentDistribution::BurrXii { gamma, c } => ok(gamma) && ok(c),
            ParentDistribution::Dagum { gamma, p } => ok(gamma) && ok(p),
            ParentDistribution::AbsStudentT { gamma } => ok(gamma),
        };
        if fine {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "distribution parameters must be positive and finite: {self}"
            )))
        }
    }

    /// The tail index the estimators are after.
    pub fn tail_index(&self) -> f64 {
        match *self {
            ParentDistribution::Pareto { gamma, .. }
            | ParentDistribution::Frechet { gamma }
            | ParentDistribution::LogLogistic { gamma }
            | ParentDistribution::BurrXii { gamma, .. }
            | ParentDistribution::Dagum { gamma, .. }
            | ParentDistribution::AbsStudentT { gamma } => gamma,
        }
    }

    /// Draws one observation.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            ParentDistribution::Pareto { gamma, scale } => {
                scale * open_unit(rng).powf(-1.0 / gamma)
            }
            ParentDistribution::Frechet { gamma } => {
                (-open_unit(rng).ln()).powf(-1.0 / gamma)
            }
            ParentDistribution::LogLogistic { gamma } => {
                let u = open_unit(rng);
                (u / (1.0 - u)).powf(1.0 / gamma)
            }
            ParentDistribution::BurrXii { gamma, c } => {
                (open_unit(rng).powf(-1.0 / c) - 1.0).powf(c / gamma)
            }
            ParentDistribution::Dagum { gamma, p } => {
                (open_unit(rng).powf(-1.0 / p) - 1.0).powf(-1.0 / gamma)
            }
            ParentDistribution::AbsStudentT { gamma } => loop {
                let z: f64 = rng.sample(StandardNormal);
                let chi2 = 2.0
                    * Gamma::new(gamma / 2.0, 1.0)
                        .expect("validated shape")
                        .sample(rng);
                if chi2 > 0.0 {
                    let x = (z / (chi2 / gamma).sqrt()).abs();
                    if x > 0.0 && x.is_finite() {
                        return x;
                    }
                }
            },
        }
    }

    /// Survival function `P(X > x)`, when available in closed form.
    pub fn survival(&self, x: f64) -> Option<f64> {
        Some(match *self {
            ParentDistribution::Pareto { gamma, scale } => {
                if x <= scale {
                    1.0
                } else {
                    (x / scale).powf(-gamma)
                }
            }
            ParentDistribution::Frechet { gamma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    -(-x.powf(-gamma)).exp_m1()
                }
            }
            ParentDistribution::LogLogistic { gamma } => {
                if x <= 0.0 {
                    1.0
                } else {
                    1.0 / (1.0 + x.powf(gamma))
                }
            }
            ParentDistribution::BurrXii { gamma, c } => {
                if x <= 0.0 {
                    1.0
                } else {
                    (1.0 + x.powf(gamma / c)).powf(-c)
                }
            }
            ParentDistribution::Dagum { gamma, p } => {
                if x <= 0.0 {
                    1.0
                } else {
                    1.0 - (1.0 + x.powf(-gamma)).powf(-p)
                }
            }
            ParentDistribution::AbsStudentT { .. } => return None,
        })
    }

    /// Inverse of [`ParentDistribution::survival`] on `(0, 1]`, when
    /// available: the `x` with `P(X > x) = s`.
    pub fn inverse_survival(&self, s: f64) -> Option<f64> {
        debug_assert!(s > 0.0 && s <= 1.0, "survival level out of range: {s}");
        Some(match *self {
            ParentDistribution::Pareto { gamma, scale } => scale * s.powf(-1.0 / gamma),
            ParentDistribution::Frechet { gamma } => {
                // survival s = 1 - exp(-x^(-gamma))
                (-(-s).ln_1p()).powf(-1.0 / gamma)
            }
            ParentDistribution::LogLogistic { gamma } => ((1.0 - s) / s).powf(1.0 / gamma),
            ParentDistribution::BurrXii { gamma, c } => {
                (s.powf(-1.0 / c) - 1.0).powf(c / gamma)
            }
            ParentDistribution::Dagum { gamma, p } => {
                ((1.0 - s).powf(-1.0 / p) - 1.0).powf(-1.0 / gamma)
            }
            ParentDistribution::AbsStudentT { .. } => return None,
        })
    }

    /// Whether closed-form survival/inverse-survival are available.
    pub fn has_closed_survival(&self) -> bool {
        !matches!(self, ParentDistribution::AbsStudentT { .. })
    }
}

impl fmt::Display for ParentDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ParentDistribution::Pareto { gamma, scale } => write!(f, "pareto:{gamma},{scale}"),
            ParentDistribution::Frechet { gamma } => write!(f, "frechet:{gamma}"),
            ParentDistribution::LogLogistic { gamma } => write!(f, "loglogistic:{gamma}"),
            ParentDistribution::BurrXii { gamma, c } => write!(f, "burr12:{gamma},{c}"),
            ParentDistribution::Dagum { gamma, p } => write!(f, "dagum:{gamma},{p}"),
            ParentDistribution::AbsStudentT { gamma } => write!(f, "abst:{gamma}"),
        }
    }
}

impl FromStr for ParentDistribution {
    type Err = Error;

    /// Parses compact spec strings such as `pareto:2,1`, `frechet:3`,
    /// `loglogistic:2`, `burr12:2,0.5`, `dagum:2,0.5` or `abst:3`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("distribution {s:?}: {msg}"));
        let (name, args) = s
            .split_once(':')
            .ok_or_else(|| bad("expected name:parameters"))?;
        let values: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad("parameters must be decimal numbers"))?;
        let want = |n: usize| {
            if values.len() == n {
                Ok(())
            } else {
                Err(bad(&format!(
                    "expected {n} parameter(s), got {}",
                    values.len()
                )))
            }
        };
        let dist = match name.trim() {
            "pareto" => {
                want(2)?;
                ParentDistribution::Pareto {
                    gamma: values[0],
                    scale: values[1],
                }
            }
            "frechet" => {
                want(1)?;
                ParentDistribution::Frechet { gamma: values[0] }
            }
            "loglogistic" => {
                want(1)?;
                ParentDistribution::LogLogistic { gamma: values[0] }
            }
            "burr12" => {
                want(2)?;
                ParentDistribution::BurrXii {
                    gamma: values[0],
                    c: values[1],
                }
            }
            "dagum" => {
                want(2)?;
                ParentDistribution::Dagum {
                    gamma: values[0],
                    p: values[1],
                }
            }
            "abst" => {
                want(1)?;
                ParentDistribution::AbsStudentT { gamma: values[0] }
            }
            other => return Err(bad(&format!("unknown distribution name {other:?}"))),
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// A uniform draw strictly inside `(0, 1)`.
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 && u < 1.0 {
            return u;
        }
    }
}

// =============================================================
// Reduced-statistic samplers
// =============================================================

/// Number of failures before the first success in Bernoulli(`p`) trials,
/// supported on `{0, 1, 2, ...}` (the "shifted" geometric law).
pub fn sample_geometric_star<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    debug_assert!(p > 0.0 && p <= 1.0, "success probability out of range: {p}");
    if p >= 1.0 {
        return 0;
    }
    let u = open_unit(rng);
    (u.ln() / (-p).ln_1p()).floor() as u64
}

/// Geometric law truncated to `{0, 1, ..., top}`: `P(X = v)` proportional to
/// `(1 - p)^v`, with success probability `p`.
#[derive(Debug, Clone, Copy)]
pub struct TruncatedGeometric {
    p: f64,
    top: u32,
}

impl TruncatedGeometric {
    pub fn new(p: f64, top: u32) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "success probability must lie strictly in (0, 1), got {p}"
            )));
        }
        Ok(Self { p, top })
    }

    /// Probability mass at `v`.
    pub fn pmf(&self, v: u32) -> f64 {
        if v > self.top {
            return 0.0;
        }
        let q = 1.0 - self.p;
        self.p * q.powi(v as i32) / (1.0 - q.powi(self.top as i32 + 1))
    }

    /// Mean and variance:
    ///
    /// `mean = (1-p)/p - (top+1) q^(top+1) / (1 - q^(top+1))`,
    /// `var  = (1-p)/p^2 - (top+1)^2 q^(top+1) / (1 - q^(top+1))^2`,
    ///
    /// with `q = 1 - p`.
    pub fn moments(&self) -> (f64, f64) {
        let q = 1.0 - self.p;
        let n1 = f64::from(self.top) + 1.0;
        let qn1 = q.powf(n1);
        let denom = 1.0 - qn1;
        let mean = q / self.p - n1 * qn1 / denom;
        let var = q / (self.p * self.p) - n1 * n1 * qn1 / (denom * denom);
        (mean, var)
    }

    /// Draws by inversion.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let q = 1.0 - self.p;
        let tail = 1.0 - q.powi(self.top as i32 + 1);
        let u = open_unit(rng);
        let v = ((1.0 - u * tail).ln() / q.ln()).ceil() as i64 - 1;
        v.clamp(0, i64::from(self.top)) as u32
    }
}

/// Model moments of the reduced statistics of one block when the parent is
/// exactly Pareto with tail index `gamma` (and the activation threshold sits
/// at or above `delta^(-1)` times the scale, so the window never clips).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockMoments {
    /// Mean near-record count per block.
    pub e_s: f64,
    /// Mean jump index per block.
    pub e_k: f64,
    /// Mean of the per-block sum of subinterval indices.
    pub e_sum_v: f64,
    /// Variance of the score-like combination
    /// `U = sum V - (b/(1-b)) S + K` with `b = delta^(gamma/m)`.
    pub var_u: f64,
}

/// Computes [`BlockMoments`] for the given parameters.
pub fn theoretical_moments(gamma: f64, delta: f64, m: u32) -> Result<BlockMoments> {
    if !(gamma > 0.0 && gamma.is_finite()) || !(delta > 0.0 && delta < 1.0) || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "need gamma > 0, delta in (0,1), m >= 2; got {gamma}, {delta}, {m}"
        )));
    }
    let mf = f64::from(m);
    let beta = delta.powf(gamma);
    let beta_m = delta.powf(gamma / mf);
    let cross = delta.powf(gamma * (1.0 - 1.0 / mf));
    Ok(BlockMoments {
        e_s: (1.0 - beta) / beta,
        e_k: beta_m / (1.0 - beta_m),
        e_sum_v: (1.0 - beta) / ((1.0 - beta_m) * cross) - mf,
        var_u: 1.0 / ((1.0 - beta_m) * (1.0 - beta_m) * cross),
    })
}

/// Draws one complete block directly from the reduced-statistic laws for a
/// Pareto parent with tail index `gamma`: jump `K`, near-record count `S`
/// and `S` subinterval indices, all independent with the distributions the
/// extraction induces. The record value is a standalone multiplicative
/// increment `a^(K+1)`; callers assembling a sample rescale cumulatively.
pub fn direct_generate_block<R: Rng + ?Sized>(
    gamma: f64,
    delta: f64,
    m: u32,
    rng: &mut R,
) -> Result<RecordBlock> {
    if !(gamma > 0.0 && gamma.is_finite()) || !(delta > 0.0 && delta < 1.0) || m < 2 {
        return Err(Error::InvalidParameter(format!(
            "need gamma > 0, delta in (0,1), m >= 2; got {gamma}, {delta}, {m}"
        )));
    }
    let beta = delta.powf(gamma);
    let beta_m = delta.powf(gamma / f64::from(m));
    let k_index = sample_geometric_star(1.0 - beta_m, rng) as u32;
    let s = sample_geometric_star(beta, rng);
    let v_law = TruncatedGeometric::new(1.0 - beta_m, m - 1)?;
    let v_indices: Vec<u32> = (0..s).map(|_| v_law.sample(rng)).collect();
    let a = delta.powf(-1.0 / f64::from(m));
    Ok(RecordBlock {
        record_value: a.powi(k_index as i32 + 1),
        k_index,
        v_indices,
        complete: true,
    })
}

/// Assembles a whole sample of `n_blocks` complete blocks drawn directly
/// from the reduced-statistic laws, with cumulatively rescaled record
/// values so the sample invariants hold.
pub fn direct_generate_sample<R: Rng + ?Sized>(
    gamma: f64,
    params: GeomRecordParams,
    n_blocks: usize,
    rng: &mut R,
) -> Result<GeometricRecordSample> {
    if n_blocks == 0 {
        return Err(Error::InvalidParameter(
            "direct generation needs at least one block".into(),
        ));
    }
    let mut blocks = Vec::with_capacity(n_blocks);
    let mut level = params.threshold_a().max(1.0);
    let mut retained = 0u64;
    for _ in 0..n_blocks {
        let mut b = direct_generate_block(gamma, params.delta(), params.m(), rng)?;
        level *= b.record_value;
        b.record_value = level;
        retained += 1 + b.near_record_count() as u64;
        blocks.push(b);
    }
    GeometricRecordSample::from_blocks(params, blocks, retained)
}

// =============================================================
// Tests
// =============================================================
