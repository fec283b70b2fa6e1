// SPDX-License-Identifier: MIT OR Apache-2.0

//! Domain types shared by every estimator.
//!
//! Index 0 is reserved for the "no change" hypothesis throughout; split `k`
//! means segments `1..=k` and `k+1..=n` (1-based), i.e. `values[..k]` and
//! `values[k..]` in slice terms.

use serde::{Deserialize, Serialize};

use crate::error::{CpError, Result};

/// Ordered real observations with an optional known noise scale.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    values: Vec<f64>,
    sigma: Option<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>, sigma: Option<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(CpError::invalid(format!(
                "series needs at least 2 observations; got {}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(CpError::invalid(format!(
                "series value at position {pos} is not finite"
            )));
        }
        if let Some(s) = sigma {
            if !(s.is_finite() && s > 0.0) {
                return Err(CpError::invalid(format!(
                    "sigma must be positive and finite; got {s}"
                )));
            }
        }
        Ok(Self { values, sigma })
    }

    /// Series with the noise scale left to plug-in estimation.
    pub fn unscaled(values: Vec<f64>) -> Result<Self> {
        Self::new(values, None)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn with_sigma(mut self, sigma: Option<f64>) -> Result<Self> {
        let values = std::mem::take(&mut self.values);
        Self::new(values, sigma)
    }
}

/// Which statistic produced a [`LogScoreProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreKind {
    GaussianLikelihood,
    Cusum,
    SelfNormalized,
}

impl ScoreKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::GaussianLikelihood => "gaussian-likelihood",
            Self::Cusum => "cusum",
            Self::SelfNormalized => "self-normalized",
        }
    }
}

impl std::fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Log-domain scores indexed by candidate split `k = 0..n-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogScoreProfile {
    scores: Vec<f64>,
    kind: ScoreKind,
}

impl LogScoreProfile {
    pub fn new(scores: Vec<f64>, kind: ScoreKind) -> Result<Self> {
        if scores.len() < 2 {
            return Err(CpError::invalid("profile needs at least 2 entries"));
        }
        if let Some(pos) = scores.iter().position(|v| !v.is_finite()) {
            return Err(CpError::invalid(format!(
                "score at split {pos} is not finite"
            )));
        }
        Ok(Self { scores, kind })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Scores mapped to probability weights `L(i) = exp(score_i) / Σ exp(score_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedProfile {
    weights: Vec<f64>,
}

impl NormalizedProfile {
    pub const SUM_TOLERANCE: f64 = 1e-12;

    /// Entries must lie in `[0, 1]` and sum to one within [`Self::SUM_TOLERANCE`].
    /// Zero is admitted because weights more than ~745 log-units below the
    /// maximum underflow.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < 2 {
            return Err(CpError::invalid(
                "normalized profile needs at least 2 entries",
            ));
        }
        if weights
            .iter()
            .any(|w| !(w.is_finite() && (0.0..=1.0).contains(w)))
        {
            return Err(CpError::invalid("weights must lie in [0, 1]"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(CpError::invalid(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Stationary law of the likelihood-weighted walk over split candidates.
#[derive(Debug, Clone, PartialEq)]
pub struct StationaryDistribution {
    pi: Vec<f64>,
}

impl StationaryDistribution {
    pub const SUM_TOLERANCE: f64 = 1e-10;

    pub fn new(pi: Vec<f64>) -> Result<Self> {
        if pi.is_empty() {
            return Err(CpError::invalid("empty distribution"));
        }
        if pi.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(CpError::invalid(
                "probabilities must be finite and nonnegative",
            ));
        }
        let total: f64 = pi.iter().sum();
        if (total - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(CpError::invalid(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self { pi })
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.pi
    }

    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }
}

/// A point `u = (u1, u2, u3)` on the evolving-radius horn torus.
///
/// Only [`crate::manifold::embed`] and [`crate::manifold::ManifoldPoint::checked`]
/// build these, so every instance is either the origin or re-embeds to itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ManifoldPoint {
    pub(crate) u: [f64; 3],
}

impl ManifoldPoint {
    pub const ORIGIN: Self = Self { u: [0.0; 3] };

    pub fn coords(&self) -> [f64; 3] {
        self.u
    }

    pub fn is_origin(&self) -> bool {
        self.u == [0.0; 3]
    }

    pub fn norm(&self) -> f64 {
        self.u.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Location/shift coordinates `(t, θ)` with `t = r/n` and `θ = arctan Δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coordinates {
    pub t: f64,
    pub theta: f64,
}

impl Coordinates {
    pub const NO_CHANGE: Self = Self { t: 0.0, theta: 0.0 };

    pub fn new(t: f64, theta: f64) -> Self {
        Self { t, theta }
    }

    /// Coordinates of a change at split `r` of `n` with shift `delta` (sigma units).
    pub fn from_split(r: usize, n: usize, delta: f64) -> Self {
        if r == 0 {
            return Self::NO_CHANGE;
        }
        Self {
            t: r as f64 / n as f64,
            theta: delta.atan(),
        }
    }
}

/// Everything the detector reports for one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChangePointEstimate {
    pub r_mle: usize,
    pub r_hat: usize,
    pub delta_mle: f64,
    pub delta_hat: f64,
    pub t_hat: f64,
    pub theta_hat: f64,
    pub u_hat: ManifoldPoint,
    pub pi0: f64,
    pub n: usize,
}

impl ChangePointEstimate {
    /// Coordinates of the maximum-likelihood estimate.
    pub fn mle_coordinates(&self) -> Coordinates {
        Coordinates::from_split(self.r_mle, self.n, self.delta_mle)
    }

    /// Coordinates of the walk-based estimate; `(0, 0)` when no change is declared.
    pub fn proposed_coordinates(&self) -> Coordinates {
        Coordinates::new(self.t_hat, self.theta_hat)
    }

    pub fn u_mle(&self) -> ManifoldPoint {
        let c = self.mle_coordinates();
        crate::manifold::embed_unchecked(c.t, c.theta)
    }
}

/// Echo of the scenario that produced a [`RiskReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportConfig {
    pub n: usize,
    pub r: usize,
    pub delta: f64,
    pub sigma: f64,
    pub replicates: usize,
    pub seed: u64,
    pub baseline: ScoreKind,
    pub proposed: ScoreKind,
}

/// Monte Carlo comparison of the maximum-likelihood and walk-based estimators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub config: ReportConfig,
    pub mean_loss_mle: f64,
    pub mean_loss_proposed: f64,
    pub se_loss_mle: f64,
    pub se_loss_proposed: f64,
    pub relative_efficiency: f64,
    pub zero_rate: f64,
    pub rejections: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub losses: Option<Vec<(f64, f64)>>,
}

impl RiskReport {
    /// `1 - proposed / mle`, or 0 when the MLE risk is zero.
    pub fn relative_efficiency_of(mean_loss_mle: f64, mean_loss_proposed: f64) -> f64 {
        if mean_loss_mle > 0.0 {
            1.0 - mean_loss_proposed / mean_loss_mle
        } else {
            0.0
        }
    }
}
