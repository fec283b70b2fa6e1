// SPDX-License-Identifier: MIT OR Apache-2.0

//! Change-point estimation with a likelihood-weighted random walk.
//!
//! The maximum-likelihood split of an at-most-one-change Gaussian series
//! never says "no change". This crate reparametrizes `(location, shift)` on
//! an evolving-radius horn torus where "no change" is a single point, and
//! estimates the split as the mode of the stationary law of a random walk
//! on a star graph whose edges are weighted by the split likelihoods. The
//! mode is either 0 or the MLE split.
//!
//! Modules, bottom up:
//!
//! - [`model`]: shared domain types.
//! - [`likelihood`]: Gaussian split log-likelihood profile and the MLE.
//! - [`altstat`]: CUSUM and self-normalized profiles usable as walk scores.
//! - [`walk`]: normalization, closed-form stationary law, power-iteration oracle.
//! - [`manifold`]: embedding, inverse map, zero-pass metric and losses.
//! - [`estimate`]: end-to-end detection.
//! - [`simulation`]: seeded Monte Carlo risk, scatter clouds, bootstrap.
//! - [`ingest`]: minute OHLC bars to daily W values.

#![forbid(unsafe_code)]
// `!(x > 0.0)` is written on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod altstat;
pub mod error;
pub mod estimate;
pub mod fmt;
pub mod ingest;
pub mod likelihood;
pub mod manifold;
pub mod model;
mod prefix;
pub mod simulation;
pub mod walk;

pub use error::{CpError, Result};
pub use estimate::{detect, DetectConfig, Detection};
pub use model::{
    ChangePointEstimate, Coordinates, LogScoreProfile, ManifoldPoint, NormalizedProfile,
    ReportConfig, RiskReport, ScoreKind, Series, StationaryDistribution,
};
pub use simulation::{monte_carlo_risk, ScenarioConfig};
