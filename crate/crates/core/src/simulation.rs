// SPDX-License-Identifier: MIT OR Apache-2.0

//! Seeded Monte Carlo harness.
//!
//! Replicate `j` draws from a ChaCha8 generator seeded with the scenario seed
//! and switched to stream `j`, so every replicate is a pure function of
//! `(seed, j)` and results do not depend on the worker count. Normal variates
//! come from `rand_distr::StandardNormal` (ziggurat). Per-replicate results
//! are collected in index order and reduced sequentially with compensated
//! summation.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CpError, Result};
use crate::estimate::{detect, estimate_from_profile, score_profile, DetectConfig};
use crate::likelihood::{best_nonzero_split, pooled_sigma_of, LikelihoodConfig};
use crate::manifold::{embed, loss};
use crate::model::{
    ChangePointEstimate, Coordinates, ManifoldPoint, ReportConfig, RiskReport, ScoreKind, Series,
};

/// Attempts per replicate before a run of degenerate draws is reported.
const MAX_ATTEMPTS: u64 = 64;
/// Bit offset separating redraw attempts from replicate indices in the stream id.
const ATTEMPT_SHIFT: u32 = 40;

/// One simulated scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub n: usize,
    /// True change index; 0 means no change.
    pub r: usize,
    /// True shift in sigma units; ignored when `r = 0`.
    pub delta: f64,
    pub sigma: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Score whose argmax over `k ≥ 1` is the baseline estimator.
    pub baseline: ScoreKind,
    /// Score fed to the walk for the proposed estimator.
    pub estimator: ScoreKind,
    /// Hand the generating sigma to the estimators; otherwise plug it in.
    pub known_sigma: bool,
    #[serde(skip)]
    pub likelihood: LikelihoodConfig,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(skip)]
    pub workers: Option<usize>,
    #[serde(skip)]
    pub keep_losses: bool,
}

impl ScenarioConfig {
    /// Gaussian-likelihood scenario with known unit sigma.
    pub fn new(n: usize, r: usize, delta: f64, replicates: usize, seed: u64) -> Self {
        Self {
            n,
            r,
            delta,
            sigma: 1.0,
            replicates,
            seed,
            baseline: ScoreKind::GaussianLikelihood,
            estimator: ScoreKind::GaussianLikelihood,
            known_sigma: true,
            likelihood: LikelihoodConfig::default(),
            workers: None,
            keep_losses: false,
        }
    }

    pub fn with_scores(mut self, baseline: ScoreKind, estimator: ScoreKind) -> Self {
        self.baseline = baseline;
        self.estimator = estimator;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(CpError::invalid(format!(
                "n must be at least 2; got {}",
                self.n
            )));
        }
        if self.r >= self.n {
            return Err(CpError::invalid(format!(
                "r must lie in 0..{}; got {}",
                self.n, self.r
            )));
        }
        if self.replicates == 0 {
            return Err(CpError::invalid("replicates must be at least 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(CpError::invalid(format!(
                "sigma must be positive; got {}",
                self.sigma
            )));
        }
        if !self.delta.is_finite() {
            return Err(CpError::invalid("delta must be finite"));
        }
        if self.workers == Some(0) {
            return Err(CpError::invalid("workers must be at least 1"));
        }
        let needs_four = matches!(self.baseline, ScoreKind::SelfNormalized)
            || matches!(self.estimator, ScoreKind::SelfNormalized);
        if needs_four && self.n < 4 {
            return Err(CpError::invalid("self-normalized scores need n >= 4"));
        }
        Ok(())
    }

    /// Shift actually applied; zero when there is no change.
    pub fn effective_delta(&self) -> f64 {
        if self.r == 0 {
            0.0
        } else {
            self.delta
        }
    }

    pub fn truth(&self) -> Coordinates {
        Coordinates::from_split(self.r, self.n, self.effective_delta())
    }

    fn report_config(&self) -> ReportConfig {
        ReportConfig {
            n: self.n,
            r: self.r,
            delta: self.effective_delta(),
            sigma: self.sigma,
            replicates: self.replicates,
            seed: self.seed,
            baseline: self.baseline,
            proposed: self.estimator,
        }
    }
}

fn stream_id(replicate: usize, attempt: u64) -> u64 {
    (replicate as u64) | (attempt << ATTEMPT_SHIFT)
}

fn draw(config: &ScenarioConfig, stream: u64) -> Result<Series> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let shift = config.effective_delta() * config.sigma;
    let values = (0..config.n)
        .map(|i| {
            let z: f64 = rng.sample(StandardNormal);
            let mean = if config.r > 0 && i >= config.r {
                shift
            } else {
                0.0
            };
            mean + config.sigma * z
        })
        .collect();
    let sigma = config.known_sigma.then_some(config.sigma);
    Series::new(values, sigma)
}

/// Series for replicate `replicate_index`; a pure function of the seed and index.
pub fn simulate_series(config: &ScenarioConfig, replicate_index: usize) -> Result<Series> {
    config.validate()?;
    draw(config, stream_id(replicate_index, 0))
}

/// What one replicate produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplicateOutcome {
    /// Split picked by the baseline estimator.
    pub r_mle: usize,
    /// Split picked by the walk (0 = no change).
    pub r_hat: usize,
    /// Argmax over `k ≥ 1` of the walk's own score profile.
    pub r_walk_mode: usize,
    pub loss_mle: f64,
    pub loss_proposed: f64,
    pub attempts: u64,
    #[serde(skip)]
    pub baseline: Coordinates,
    #[serde(skip)]
    pub proposed: Coordinates,
}

struct Estimates {
    baseline: ChangePointEstimate,
    proposed: ChangePointEstimate,
}

fn estimate_both(series: &Series, config: &ScenarioConfig) -> Result<Estimates> {
    let proposed = detect(
        series,
        &DetectConfig {
            score: config.estimator,
            likelihood: config.likelihood,
        },
    )?;
    if config.baseline == config.estimator {
        let est = proposed.estimate;
        return Ok(Estimates {
            baseline: est.clone(),
            proposed: est,
        });
    }
    let (profile, sigma) = score_profile(series, config.baseline, &config.likelihood)?;
    let sigma = match (sigma, series.sigma()) {
        (Some(s), _) | (None, Some(s)) => s,
        (None, None) => pooled_sigma_of(series.values(), best_nonzero_split(&profile))?,
    };
    let (baseline, _) = estimate_from_profile(series.values(), &profile, sigma)?;
    Ok(Estimates {
        baseline,
        proposed: proposed.estimate,
    })
}

fn run_one(
    config: &ScenarioConfig,
    replicate: usize,
    truth: Coordinates,
) -> Result<ReplicateOutcome> {
    let mut last_err = None;
    for attempt in 0..MAX_ATTEMPTS {
        let series = draw(config, stream_id(replicate, attempt))?;
        match estimate_both(&series, config) {
            Ok(est) => {
                let baseline = est.baseline.mle_coordinates();
                let proposed = est.proposed.proposed_coordinates();
                return Ok(ReplicateOutcome {
                    r_mle: est.baseline.r_mle,
                    r_hat: est.proposed.r_hat,
                    r_walk_mode: est.proposed.r_mle,
                    loss_mle: loss(baseline, truth),
                    loss_proposed: loss(proposed, truth),
                    attempts: attempt + 1,
                    baseline,
                    proposed,
                });
            }
            Err(CpError::DegenerateScale) => last_err = Some(CpError::DegenerateScale),
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or(CpError::DegenerateScale))
}

fn in_pool<T: Send>(workers: Option<usize>, job: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(job()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CpError::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(job))
        }
    }
}

/// Every replicate of a scenario, in index order.
pub fn run_replicates(config: &ScenarioConfig) -> Result<Vec<ReplicateOutcome>> {
    config.validate()?;
    let truth = config.truth();
    in_pool(config.workers, || {
        (0..config.replicates)
            .into_par_iter()
            .map(|j| run_one(config, j, truth))
            .collect::<Result<Vec<_>>>()
    })?
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_se(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut total = CompensatedSum::default();
    let mut count = 0usize;
    for v in values.clone() {
        total.add(v);
        count += 1;
    }
    let mean = total.value() / count as f64;
    if count < 2 {
        return (mean, 0.0);
    }
    let mut ss = CompensatedSum::default();
    for v in values {
        ss.add((v - mean) * (v - mean));
    }
    let var = ss.value() / (count - 1) as f64;
    (mean, (var / count as f64).sqrt())
}

/// Aggregates replicate outcomes into a [`RiskReport`].
pub fn summarize(config: &ScenarioConfig, outcomes: &[ReplicateOutcome]) -> RiskReport {
    let (mean_loss_mle, se_loss_mle) = mean_and_se(outcomes.iter().map(|o| o.loss_mle));
    let (mean_loss_proposed, se_loss_proposed) =
        mean_and_se(outcomes.iter().map(|o| o.loss_proposed));
    let zeros = outcomes.iter().filter(|o| o.r_hat == 0).count();
    let rejections = outcomes.iter().map(|o| (o.attempts - 1) as usize).sum();
    RiskReport {
        config: config.report_config(),
        mean_loss_mle,
        mean_loss_proposed,
        se_loss_mle,
        se_loss_proposed,
        relative_efficiency: RiskReport::relative_efficiency_of(mean_loss_mle, mean_loss_proposed),
        zero_rate: zeros as f64 / outcomes.len() as f64,
        rejections,
        losses: config.keep_losses.then(|| {
            outcomes
                .iter()
                .map(|o| (o.loss_mle, o.loss_proposed))
                .collect()
        }),
    }
}

/// Monte Carlo risk of the baseline and walk-based estimators.
pub fn monte_carlo_risk(config: &ScenarioConfig) -> Result<RiskReport> {
    let outcomes = run_replicates(config)?;
    Ok(summarize(config, &outcomes))
}

/// `P(r̂ = 0)` under the no-change model for each sample size.
pub fn zero_probability_curve(
    n_grid: &[usize],
    replicates: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<(usize, f64)>> {
    n_grid
        .iter()
        .map(|&n| {
            let config = ScenarioConfig::new(n, 0, 0.0, replicates, seed).with_workers(workers);
            monte_carlo_risk(&config).map(|r| (n, r.zero_rate))
        })
        .collect()
}

/// Per-replicate embedded estimates `(û_m, û)`.
pub fn scatter_cloud(config: &ScenarioConfig) -> Result<Vec<(ManifoldPoint, ManifoldPoint)>> {
    run_replicates(config)?
        .iter()
        .map(|o| {
            Ok((
                embed(o.baseline.t, o.baseline.theta)?,
                embed(o.proposed.t, o.proposed.theta)?,
            ))
        })
        .collect()
}

/// A fitted single-change Gaussian model used as bootstrap truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FittedModel {
    pub n: usize,
    pub r: usize,
    /// Shift in sigma units.
    pub delta: f64,
    pub sigma: f64,
}

impl FittedModel {
    fn scenario(&self, reps: usize, seed: u64, workers: Option<usize>) -> ScenarioConfig {
        ScenarioConfig {
            sigma: self.sigma,
            ..ScenarioConfig::new(self.n, self.r, self.delta, reps, seed)
        }
        .with_workers(workers)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BootstrapRisk {
    pub mle_fit: FittedModel,
    pub proposed_fit: FittedModel,
    pub risk_mle: f64,
    pub risk_proposed: f64,
    pub se_mle: f64,
    pub se_proposed: f64,
}

/// Both fits of an observed series: the MLE fit at `r̂_m`, and the walk's
/// fit, which is the no-change model with whole-series scale when `r̂ = 0`.
pub fn fit_models(series: &Series) -> Result<(FittedModel, FittedModel)> {
    let det = detect(series, &DetectConfig::default())?;
    let est = det.estimate;
    let n = series.len();
    let mle_fit = FittedModel {
        n,
        r: est.r_mle,
        delta: est.delta_mle,
        sigma: det.sigma_used,
    };
    let proposed_fit = if est.r_hat == 0 {
        let sigma = match series.sigma() {
            Some(s) => s,
            None => pooled_sigma_of(series.values(), 0)?,
        };
        FittedModel {
            n,
            r: 0,
            delta: 0.0,
            sigma,
        }
    } else {
        mle_fit
    };
    Ok((mle_fit, proposed_fit))
}

/// Parametric bootstrap from explicit fits. Each estimator's risk is its mean
/// loss on series resampled from its own fit, with the fitted sigma treated
/// as known.
pub fn bootstrap_from_fits(
    mle_fit: FittedModel,
    proposed_fit: FittedModel,
    reps: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<BootstrapRisk> {
    let mle_report = monte_carlo_risk(&mle_fit.scenario(reps, seed, workers))?;
    let prop_report = if proposed_fit == mle_fit {
        mle_report.clone()
    } else {
        monte_carlo_risk(&proposed_fit.scenario(reps, seed, workers))?
    };
    Ok(BootstrapRisk {
        mle_fit,
        proposed_fit,
        risk_mle: mle_report.mean_loss_mle,
        risk_proposed: prop_report.mean_loss_proposed,
        se_mle: mle_report.se_loss_mle,
        se_proposed: prop_report.se_loss_proposed,
    })
}

/// Fits `series` and bootstraps both estimators' risks.
pub fn parametric_bootstrap_risk(
    series: &Series,
    reps: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<BootstrapRisk> {
    let (mle_fit, proposed_fit) = fit_models(series)?;
    bootstrap_from_fits(mle_fit, proposed_fit, reps, seed, workers)
}
