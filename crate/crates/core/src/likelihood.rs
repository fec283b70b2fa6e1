// SPDX-License-Identifier: MIT OR Apache-2.0

//! Gaussian split log-likelihood profile and the maximum-likelihood split.
//!
//! `scores[0]` is the single-Gaussian log-likelihood with the mean profiled at
//! the grand mean; `scores[k]` for `k ≥ 1` profiles one mean per segment. The
//! normalizing constant `-(n/2) log(2πσ²)` is kept, so the values are true
//! log-likelihoods. Everything is O(n) through centered prefix sums.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{CpError, Result};
use crate::model::{LogScoreProfile, ScoreKind, Series};
use crate::prefix::{mean, sum_sq_dev, CenteredSums};

/// Score assigned to splits excluded by a minimum segment length.
pub const EXCLUDED_SCORE: f64 = -1.0e300;

/// How to resolve the working sigma when the series carries none.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PluginSigma {
    /// Pooled maximum-likelihood scale at the MLE split.
    #[default]
    PooledAtMle,
    /// Whole-series maximum-likelihood scale.
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikelihoodConfig {
    pub plugin: PluginSigma,
    /// Smallest admissible segment length; splits leaving a shorter segment
    /// get [`EXCLUDED_SCORE`].
    pub min_segment: usize,
}

impl Default for LikelihoodConfig {
    fn default() -> Self {
        Self {
            plugin: PluginSigma::PooledAtMle,
            min_segment: 1,
        }
    }
}

impl LikelihoodConfig {
    fn admits(&self, k: usize, n: usize) -> bool {
        let m = self.min_segment.max(1);
        k >= m && n - k >= m
    }
}

/// Profile together with the sigma it was computed with.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianProfile {
    pub profile: LogScoreProfile,
    pub sigma: f64,
}

fn check_split(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(CpError::invalid(format!(
            "split {k} outside 1..={} for series of length {n}",
            n - 1
        )));
    }
    Ok(())
}

/// Segment mean shift `mean(x[k..]) - mean(x[..k])` in raw units.
pub fn raw_mean_shift(values: &[f64], k: usize) -> Result<f64> {
    check_split(values.len(), k)?;
    Ok(mean(&values[k..]) - mean(&values[..k]))
}

/// Mean shift at split `k` in units of the supplied scale.
pub fn delta_hat_with_sigma(values: &[f64], k: usize, sigma: f64) -> Result<f64> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(CpError::DegenerateScale);
    }
    Ok(raw_mean_shift(values, k)? / sigma)
}

/// Mean shift at split `k` in units of the series' working sigma.
pub fn delta_hat(series: &Series, k: usize) -> Result<f64> {
    check_split(series.len(), k)?;
    let sigma = working_sigma(series, &LikelihoodConfig::default())?;
    delta_hat_with_sigma(series.values(), k, sigma)
}

/// Square root of the maximum-likelihood pooled variance. `split = 0` uses
/// the whole series.
pub fn pooled_sigma(series: &Series, split: usize) -> Result<f64> {
    pooled_sigma_of(series.values(), split)
}

pub(crate) fn pooled_sigma_of(values: &[f64], split: usize) -> Result<f64> {
    let n = values.len();
    if split >= n {
        return Err(CpError::invalid(format!(
            "split {split} outside 0..={} for series of length {n}",
            n - 1
        )));
    }
    let ss = if split == 0 {
        sum_sq_dev(values)
    } else {
        sum_sq_dev(&values[..split]) + sum_sq_dev(&values[split..])
    };
    let var = ss / n as f64;
    let scale = values.iter().map(|x| x * x).sum::<f64>() / n as f64;
    if !(var > f64::EPSILON * f64::EPSILON * scale) {
        return Err(CpError::DegenerateScale);
    }
    Ok(var.sqrt())
}

/// Argmax of the between-segment sum of squares over admissible splits.
/// This is the MLE split for every sigma, so it can seed the plug-in scale.
fn best_split(sums: &CenteredSums, config: &LikelihoodConfig) -> Option<usize> {
    let n = sums.len();
    let mut best: Option<(usize, f64)> = None;
    for k in 1..n {
        if !config.admits(k, n) {
            continue;
        }
        let b = sums.between_ss(k);
        if best.is_none_or(|(_, v)| b > v) {
            best = Some((k, b));
        }
    }
    best.map(|(k, _)| k)
}

/// Known sigma when present, otherwise the configured plug-in.
pub fn working_sigma(series: &Series, config: &LikelihoodConfig) -> Result<f64> {
    resolve_sigma(series, &CenteredSums::new(series.values()), config)
}

fn resolve_sigma(series: &Series, sums: &CenteredSums, config: &LikelihoodConfig) -> Result<f64> {
    if let Some(s) = series.sigma() {
        return Ok(s);
    }
    match config.plugin {
        PluginSigma::Global => pooled_sigma(series, 0),
        PluginSigma::PooledAtMle => {
            let split = best_split(sums, config).ok_or_else(|| {
                CpError::invalid("minimum segment length leaves no admissible split")
            })?;
            pooled_sigma(series, split)
        }
    }
}

/// Log-likelihood profile under the default configuration.
pub fn log_likelihood_profile(series: &Series) -> Result<LogScoreProfile> {
    Ok(gaussian_profile(series, &LikelihoodConfig::default())?.profile)
}

/// Log-likelihood profile and the sigma it used.
pub fn gaussian_profile(series: &Series, config: &LikelihoodConfig) -> Result<GaussianProfile> {
    let values = series.values();
    let n = values.len();
    let sums = CenteredSums::new(values);

    let sigma = resolve_sigma(series, &sums, config)?;
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(CpError::DegenerateScale);
    }

    let var = sigma * sigma;
    let nf = n as f64;
    let null = -0.5 * nf * (2.0 * PI * var).ln() - sums.ss_total / (2.0 * var);

    let mut scores = Vec::with_capacity(n);
    scores.push(null);
    for k in 1..n {
        if config.admits(k, n) {
            scores.push(null + sums.between_ss(k) / (2.0 * var));
        } else {
            scores.push(EXCLUDED_SCORE);
        }
    }
    Ok(GaussianProfile {
        profile: LogScoreProfile::new(scores, ScoreKind::GaussianLikelihood)?,
        sigma,
    })
}

/// Argmax over all splits, ties to the smallest index.
pub fn mle_change_point(profile: &LogScoreProfile) -> usize {
    argmax_from(profile.scores(), 0)
}

/// Argmax over splits `k ≥ 1`, ties to the smallest index.
pub fn best_nonzero_split(profile: &LogScoreProfile) -> usize {
    argmax_from(profile.scores(), 1)
}

pub(crate) fn argmax_from(values: &[f64], start: usize) -> usize {
    let mut best = start;
    for (i, v) in values.iter().enumerate().skip(start + 1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Direct O(n²) log-likelihood: sum Gaussian log-densities with segment
    /// means computed from scratch.
    fn brute_log_lik(values: &[f64], k: usize, sigma: f64) -> f64 {
        let dens = |x: f64, m: f64| {
            -0.5 * (2.0 * PI * sigma * sigma).ln() - (x - m) * (x - m) / (2.0 * sigma * sigma)
        };
        let avg = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        if k == 0 {
            let m = avg(values);
            values.iter().map(|&x| dens(x, m)).sum()
        } else {
            let (a, b) = values.split_at(k);
            let (ma, mb) = (avg(a), avg(b));
            a.iter().map(|&x| dens(x, ma)).sum::<f64>()
                + b.iter().map(|&x| dens(x, mb)).sum::<f64>()
        }
    }

    fn series(v: &[f64], sigma: Option<f64>) -> Series {
        Series::new(v.to_vec(), sigma).unwrap()
    }

    #[test]
    fn delta_hat_examples() {
        let s = series(&[0.0, 0.0, 2.0, 2.0], Some(1.0));
        assert_eq!(delta_hat(&s, 2).unwrap(), 2.0);

        let s = series(&[5.0, 5.0, 5.0, 5.0], Some(1.0));
        for k in 1..4 {
            assert_eq!(delta_hat(&s, k).unwrap(), 0.0);
        }

        let s = series(&[0.3, -0.1, 1.9, 2.2, 2.0], Some(1.0));
        let expected = (1.9 + 2.2 + 2.0) / 3.0 - (0.3 - 0.1) / 2.0;
        assert_relative_eq!(delta_hat(&s, 2).unwrap(), expected, max_relative = 1e-14);
        assert_relative_eq!(expected, 1.933_333_333_333_333, max_relative = 1e-14);
    }

    #[test]
    fn delta_hat_rejects_out_of_range() {
        let s = series(&[0.0, 1.0, 2.0], Some(1.0));
        assert!(matches!(delta_hat(&s, 0), Err(CpError::InvalidInput(_))));
        assert!(matches!(delta_hat(&s, 3), Err(CpError::InvalidInput(_))));
    }

    #[test]
    fn delta_hat_uses_plugin_sigma() {
        // MLE split is 2, pooled sigma there is 0.5, raw shift is 3.
        let s = series(&[0.0, 1.0, 3.0, 4.0], None);
        assert_relative_eq!(delta_hat(&s, 2).unwrap(), 6.0, max_relative = 1e-14);
    }

    #[test]
    fn pooled_sigma_examples() {
        let s = series(&[0.0, 0.0, 2.0, 2.0], None);
        assert_eq!(pooled_sigma(&s, 2), Err(CpError::DegenerateScale));

        let s = series(&[0.0, 1.0, 3.0, 4.0], None);
        assert_relative_eq!(pooled_sigma(&s, 2).unwrap(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(
            pooled_sigma(&s, 0).unwrap(),
            2.5f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn profile_matches_direct_evaluation() {
        let v = [0.3, -1.2, 0.8, 2.5, 1.9, 2.2, 3.1, 1.7];
        let s = series(&v, Some(1.3));
        let p = log_likelihood_profile(&s).unwrap();
        for k in 0..v.len() {
            assert_relative_eq!(
                p.scores()[k],
                brute_log_lik(&v, k, 1.3),
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn ratio_identity_small_example() {
        let s = series(&[0.0, 0.0, 2.0, 2.0], Some(1.0));
        let p = log_likelihood_profile(&s).unwrap();
        // (n/2)(k/n)(1 - k/n)·Δ̂² = 2 · 1/4 · 4
        assert_relative_eq!(p.scores()[2] - p.scores()[0], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn constant_series_flat_profile() {
        let s = series(&[5.0; 6], Some(1.0));
        let p = log_likelihood_profile(&s).unwrap();
        assert!(p.scores().iter().all(|&x| x == p.scores()[0]));
    }

    #[test]
    fn constant_series_without_sigma_is_degenerate() {
        let s = series(&[5.0; 6], None);
        assert_eq!(log_likelihood_profile(&s), Err(CpError::DegenerateScale));
    }

    #[test]
    fn mle_examples() {
        let s = series(&[0.0, 0.0, 2.0, 2.0], Some(1.0));
        let p = log_likelihood_profile(&s).unwrap();
        assert_eq!(mle_change_point(&p), 2);

        let p = LogScoreProfile::new(vec![0.0, 4.0, 1.0, 1.0], ScoreKind::Cusum).unwrap();
        assert_eq!(mle_change_point(&p), 1);
    }

    #[test]
    fn ties_break_to_smallest_index() {
        let p = LogScoreProfile::new(vec![1.0, 1.0, 1.0], ScoreKind::Cusum).unwrap();
        assert_eq!(mle_change_point(&p), 0);
        assert_eq!(best_nonzero_split(&p), 1);
    }

    #[test]
    fn global_plugin_sigma() {
        let s = series(&[0.0, 1.0, 3.0, 4.0], None);
        let cfg = LikelihoodConfig {
            plugin: PluginSigma::Global,
            min_segment: 1,
        };
        let g = gaussian_profile(&s, &cfg).unwrap();
        assert_relative_eq!(g.sigma, 2.5f64.sqrt(), max_relative = 1e-14);
        let g = gaussian_profile(&s, &LikelihoodConfig::default()).unwrap();
        assert_relative_eq!(g.sigma, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn min_segment_excludes_edges() {
        let s = series(&[9.0, 0.0, 0.1, 0.2, 0.1, -0.1], Some(1.0));
        let cfg = LikelihoodConfig {
            plugin: PluginSigma::PooledAtMle,
            min_segment: 2,
        };
        let g = gaussian_profile(&s, &cfg).unwrap();
        assert_eq!(g.profile.scores()[1], EXCLUDED_SCORE);
        assert_eq!(g.profile.scores()[5], EXCLUDED_SCORE);
        assert_ne!(mle_change_point(&g.profile), 1);
        let g = gaussian_profile(&s, &LikelihoodConfig::default()).unwrap();
        assert_eq!(mle_change_point(&g.profile), 1);
    }
}
