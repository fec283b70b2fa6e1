// SPDX-License-Identifier: MIT OR Apache-2.0

//! Likelihood-weighted random walk on the star graph over split candidates.
//!
//! Every node is self-looped and joined to node 0 ("no change"). With weights
//! `L`, the transition matrix is `T = D(A L)^{-1} A D(L)` and its stationary
//! law has the closed form
//!
//! ```text
//! π(0) = L(0) / D,   π(i) = (L(i)² + L(0) L(i)) / D,
//! D    = Σ L(i)² + 2 L(0) (1 - L(0)).
//! ```
//!
//! The closed form is the production path. [`stationary_oracle`] builds the
//! dense matrix and runs power iteration; it exists to check the closed form.

use crate::error::{CpError, Result};
use crate::likelihood::argmax_from;
use crate::model::{LogScoreProfile, NormalizedProfile, StationaryDistribution};

/// Largest chain the dense oracle will build.
pub const ORACLE_MAX_STATES: usize = 10_000;
pub const ORACLE_TOLERANCE: f64 = 1e-13;
pub const ORACLE_MAX_ITERATIONS: usize = 1_000_000;

/// Numerically stable `log Σ exp(x_i)`.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `L(i) = exp(score_i - logsumexp(scores))`.
pub fn normalize_scores(profile: &LogScoreProfile) -> NormalizedProfile {
    let scores = profile.scores();
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let raw: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.into_iter().map(|w| w / total).collect();
    NormalizedProfile::new(weights).expect("softmax of finite scores is a probability vector")
}

/// Closed-form stationary distribution of the star-graph walk.
pub fn stationary_distribution(weights: &NormalizedProfile) -> StationaryDistribution {
    let l = weights.weights();
    let l0 = l[0];
    let denom = l.iter().map(|w| w * w).sum::<f64>() + 2.0 * l0 * (1.0 - l0);
    let mut pi = Vec::with_capacity(l.len());
    pi.push(l0 / denom);
    pi.extend(l[1..].iter().map(|li| (li * li + l0 * li) / denom));
    StationaryDistribution::new(pi).expect("closed form sums to one")
}

/// Mode of the stationary law; ties to the smallest index.
pub fn proposed_change_point(pi: &StationaryDistribution) -> usize {
    argmax_from(pi.probabilities(), 0)
}

/// Dense row-stochastic transition matrix of the walk. Test oracle only.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TransitionMatrix {
    /// Builds `T = D(A L)^{-1} A D(L)` with `A` the self-looped star adjacency.
    pub fn from_weights(weights: &NormalizedProfile) -> Result<Self> {
        let l = weights.weights();
        let n = l.len();
        if n > ORACLE_MAX_STATES {
            return Err(CpError::invalid(format!(
                "dense oracle limited to {ORACLE_MAX_STATES} states; got {n}"
            )));
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let row = &mut entries[i * n..(i + 1) * n];
            let mut mass = 0.0;
            for (j, cell) in row.iter_mut().enumerate() {
                if adjacent(i, j) {
                    *cell = l[j];
                    mass += l[j];
                }
            }
            if !(mass > 0.0) {
                return Err(CpError::invalid(format!("row {i} of the walk has no mass")));
            }
            row.iter_mut().for_each(|c| *c /= mass);
        }
        Ok(Self { n, entries })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    /// `T²`, rows renormalized to absorb rounding drift.
    fn squared(&self) -> Self {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            let out = &mut entries[i * n..(i + 1) * n];
            self.left_multiply(self.row(i), out);
            let mass: f64 = out.iter().sum();
            out.iter_mut().for_each(|c| *c /= mass);
        }
        Self { n, entries }
    }

    /// `v T` for a row vector `v`.
    pub fn left_multiply(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, vi) in v.iter().enumerate() {
            if *vi == 0.0 {
                continue;
            }
            for (o, t) in out.iter_mut().zip(self.row(i)) {
                *o += vi * t;
            }
        }
    }
}

/// Star adjacency with self-loops: `i == j` or `i·j == 0`.
pub fn adjacent(i: usize, j: usize) -> bool {
    i == j || i == 0 || j == 0
}

/// States up to which the oracle squares `T` instead of stepping with it.
const SQUARING_MAX_STATES: usize = 64;

/// Power iteration from the uniform vector until the sup-norm change drops
/// below [`ORACLE_TOLERANCE`].
///
/// For small chains each pass also squares the current power of `T`, so pass
/// `k` applies `T^(2^k)`; the residual then shrinks quadratically and the
/// stopping rule stays tight when some `L(0)/(L(0)+L(i))` is tiny. Larger
/// chains take plain steps. Either way at most [`ORACLE_MAX_ITERATIONS`]
/// passes are made.
pub fn stationary_oracle(weights: &NormalizedProfile) -> Result<StationaryDistribution> {
    let t = TransitionMatrix::from_weights(weights)?;
    let n = t.size();
    let mut power = (n <= SQUARING_MAX_STATES).then(|| t.clone());
    let mut v = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    for _ in 0..ORACLE_MAX_ITERATIONS {
        power.as_ref().unwrap_or(&t).left_multiply(&v, &mut next);
        let change = v
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut v, &mut next);
        if change < ORACLE_TOLERANCE {
            let total: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= total);
            return StationaryDistribution::new(v);
        }
        if let Some(p) = power.as_mut() {
            *p = p.squared();
        }
    }
    Err(CpError::OracleDidNotConverge)
}
