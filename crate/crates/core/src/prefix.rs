// SPDX-License-Identifier: MIT OR Apache-2.0

//! Centered prefix sums shared by the O(n) profile builders.

/// `partial[k] = Σ_{i<k} (x_i - x̄)` for `k = 0..=n`.
#[derive(Debug, Clone)]
pub(crate) struct CenteredSums {
    pub partial: Vec<f64>,
    pub centered: Vec<f64>,
    pub ss_total: f64,
}

impl CenteredSums {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mean = mean(values);
        let centered: Vec<f64> = values.iter().map(|x| x - mean).collect();
        let mut partial = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        partial.push(acc);
        for c in &centered {
            acc += c;
            partial.push(acc);
        }
        let ss_total = centered.iter().map(|c| c * c).sum();
        Self {
            partial,
            centered,
            ss_total,
        }
    }

    pub fn len(&self) -> usize {
        self.centered.len()
    }

    /// Between-segment sum of squares for split `k` (1 ≤ k ≤ n-1):
    /// `k(n-k)/n · (m2 - m1)²`.
    pub fn between_ss(&self, k: usize) -> f64 {
        let n = self.len();
        let left = self.partial[k];
        let right = self.partial[n] - left;
        let kf = k as f64;
        let rf = (n - k) as f64;
        let diff = right / rf - left / kf;
        kf * rf / n as f64 * diff * diff
    }
}

/// Two-pass mean with a correction term, stable for large offsets.
pub(crate) fn mean(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let first = values.iter().sum::<f64>() / n;
    let correction = values.iter().map(|x| x - first).sum::<f64>() / n;
    first + correction
}

/// Sum of squared deviations about the segment mean.
pub(crate) fn sum_sq_dev(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|x| (x - m) * (x - m)).sum()
}
