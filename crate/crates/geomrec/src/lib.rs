//! Tail-index estimation for Pareto-type (regularly varying) data using
//! discretized geometric records.
//!
//! The central idea: run through a stream of positive observations and keep
//! only its running maxima ("records") together with the observations that
//! fall just below the current maximum ("near-records" within a multiplicative
//! window `(delta * max, max]`). The window is split geometrically into `m`
//! subintervals, so every retained observation reduces to a small integer:
//! the jump index of a new record, or the subinterval index of a near-record.
//! Those integers carry enough information to estimate the tail index of the
//! underlying distribution by explicit maximum likelihood, and they can be
//! stored in a handful of bytes no matter how long the raw stream was.
//!
//! Modules:
//! - [`records`]: streaming extraction of record/near-record summaries.
//! - [`estimators`]: the geometric-record MLE (two variants), its asymptotic
//!   standard deviation and confidence intervals, plus classical Hill and
//!   record-only baselines for comparison.
//! - [`dist`]: heavy-tailed parent distributions for simulation, and direct
//!   samplers for the summary statistics themselves.
//! - [`montecarlo`]: reproducible simulation studies (bias/MSE tables, CLT
//!   checks, estimate-vs-sample-usage traces).
//! - [`finance`]: helpers for applying the estimator to price series
//!   (log-returns, standardization, empirical survival fits, delta scans).

pub mod dist;
pub mod error;
pub mod estimators;
pub mod finance;
pub mod montecarlo;
pub mod records;

pub use error::Error;
