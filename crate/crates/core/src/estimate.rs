// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end detection: score profile, walk, and both estimators.

use serde::Serialize;

use crate::altstat::{cusum_profile, self_normalized_profile};
use crate::error::{CpError, Result};
use crate::likelihood::{
    best_nonzero_split, delta_hat_with_sigma, gaussian_profile, pooled_sigma_of, LikelihoodConfig,
    PluginSigma,
};
use crate::manifold::embed;
use crate::model::{
    ChangePointEstimate, LogScoreProfile, ScoreKind, Series, StationaryDistribution,
};
use crate::walk::{normalize_scores, proposed_change_point, stationary_distribution};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectConfig {
    pub score: ScoreKind,
    pub likelihood: LikelihoodConfig,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self::with_score(ScoreKind::GaussianLikelihood)
    }
}

impl DetectConfig {
    pub fn with_score(score: ScoreKind) -> Self {
        Self {
            score,
            likelihood: LikelihoodConfig::default(),
        }
    }
}

/// A detection result plus the context needed to report it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Detection {
    pub estimate: ChangePointEstimate,
    pub sigma_used: f64,
    pub score_kind: ScoreKind,
    #[serde(skip)]
    pub pi: StationaryDistribution,
}

/// Score profile of the requested kind. For the Gaussian likelihood the
/// returned sigma is the one the profile was built with.
pub fn score_profile(
    series: &Series,
    kind: ScoreKind,
    config: &LikelihoodConfig,
) -> Result<(LogScoreProfile, Option<f64>)> {
    match kind {
        ScoreKind::GaussianLikelihood => {
            let g = gaussian_profile(series, config)?;
            Ok((g.profile, Some(g.sigma)))
        }
        ScoreKind::Cusum => Ok((cusum_profile(series), None)),
        ScoreKind::SelfNormalized => Ok((self_normalized_profile(series)?, None)),
    }
}

/// Working sigma for a split chosen by a non-likelihood score.
fn sigma_for_split(series: &Series, split: usize, config: &LikelihoodConfig) -> Result<f64> {
    if let Some(s) = series.sigma() {
        return Ok(s);
    }
    match config.plugin {
        PluginSigma::Global => pooled_sigma_of(series.values(), 0),
        PluginSigma::PooledAtMle => pooled_sigma_of(series.values(), split),
    }
}

/// Runs the walk on `profile` and packages both estimators.
///
/// `r_mle` is the argmax of the profile over `k ≥ 1`; for the Gaussian
/// likelihood this is the maximum-likelihood split. Shifts are reported in
/// units of `sigma`.
pub fn estimate_from_profile(
    values: &[f64],
    profile: &LogScoreProfile,
    sigma: f64,
) -> Result<(ChangePointEstimate, StationaryDistribution)> {
    let n = values.len();
    if profile.len() != n {
        return Err(CpError::invalid(format!(
            "profile length {} differs from series length {n}",
            profile.len()
        )));
    }
    let r_mle = best_nonzero_split(profile);
    let delta_mle = delta_hat_with_sigma(values, r_mle, sigma)?;

    let weights = normalize_scores(profile);
    let pi = stationary_distribution(&weights);
    let mode = proposed_change_point(&pi);
    // The walk preserves the ordering of splits k ≥ 1, so a nonzero mode can
    // only differ from r_mle through an exact tie in π.
    debug_assert!(mode == 0 || pi.probabilities()[mode] == pi.probabilities()[r_mle]);
    let r_hat = if mode == 0 { 0 } else { r_mle };

    let delta_hat = if r_hat == 0 { 0.0 } else { delta_mle };
    let t_hat = r_hat as f64 / n as f64;
    let theta_hat = delta_hat.atan();
    let u_hat = embed(t_hat, theta_hat)?;
    let estimate = ChangePointEstimate {
        r_mle,
        r_hat,
        delta_mle,
        delta_hat,
        t_hat,
        theta_hat,
        u_hat,
        pi0: pi.probabilities()[0],
        n,
    };
    Ok((estimate, pi))
}

/// Detects a change in `series` with the configured score.
pub fn detect(series: &Series, config: &DetectConfig) -> Result<Detection> {
    let kind = config.score;
    let (profile, sigma) = score_profile(series, kind, &config.likelihood)?;
    let sigma = match sigma {
        Some(s) => s,
        None => sigma_for_split(series, best_nonzero_split(&profile), &config.likelihood)?,
    };
    let (estimate, pi) = estimate_from_profile(series.values(), &profile, sigma)?;
    Ok(Detection {
        estimate,
        sigma_used: sigma,
        score_kind: kind,
        pi,
    })
}
