// SPDX-License-Identifier: MIT OR Apache-2.0

//! CUSUM and self-normalized score profiles.
//!
//! Both statistics are stored as log-scores, so feeding them to the walk is
//! the same as weighting splits by `exp(H_n(k))` or `exp(G_n(k))`.

use crate::error::{CpError, Result};
use crate::model::{LogScoreProfile, ScoreKind, Series};
use crate::prefix::CenteredSums;

/// Score given to a split whose self-normalizer vanishes while the partial
/// sum does not. Just below the log of the largest finite double.
pub const DEGENERATE_CAP: f64 = 745.0;

/// Round-off allowance, in units of machine epsilon times the magnitude of
/// the terms being cancelled, below which a normalizer counts as zero.
const CANCELLATION_ULPS: f64 = 1024.0;

/// `H_n(k) = |Σ_{i≤k} (x_i - x̄)| / √n`, with `H_n(0) = 0`.
pub fn cusum_profile(series: &Series) -> LogScoreProfile {
    let sums = CenteredSums::new(series.values());
    let n = sums.len();
    let root_n = (n as f64).sqrt();
    let scores = (0..n).map(|k| sums.partial[k].abs() / root_n).collect();
    LogScoreProfile::new(scores, ScoreKind::Cusum).expect("cusum scores are finite")
}

/// `G_n(k) = S_k² / (V_n(k)/n)` with `S_k` the centered partial sum and
/// `V_n(k)` the sum of squared within-segment recentred partial sums.
///
/// Runs in O(n): every segment sum is expanded into running sums of `P_t`,
/// `P_t²` and `t·P_t`. Degenerate normalizers score [`DEGENERATE_CAP`] (or 0
/// when the partial sum vanishes too).
pub fn self_normalized_profile(series: &Series) -> Result<LogScoreProfile> {
    let n = series.len();
    if n < 4 {
        return Err(CpError::invalid(format!(
            "self-normalized statistic needs at least 4 observations; got {n}"
        )));
    }
    let sums = CenteredSums::new(series.values());
    let p = &sums.partial;

    // Cumulative Σ_{t≤k} P_t, Σ P_t², Σ t·P_t over t = 1..=k.
    let mut a1 = vec![0.0; n + 1];
    let mut a2 = vec![0.0; n + 1];
    let mut b = vec![0.0; n + 1];
    for t in 1..=n {
        a1[t] = a1[t - 1] + p[t];
        a2[t] = a2[t - 1] + p[t] * p[t];
        b[t] = b[t - 1] + t as f64 * p[t];
    }
    let sum_sq_idx = |m: usize| {
        let m = m as f64;
        m * (m + 1.0) * (2.0 * m + 1.0) / 6.0
    };
    let abs_sum: f64 = sums.centered.iter().map(|c| c.abs()).sum();

    let nf = n as f64;
    let mut scores = Vec::with_capacity(n);
    scores.push(0.0);
    for k in 1..n {
        let kf = k as f64;
        let rf = (n - k) as f64;
        let pk = p[k];

        // Σ_{t≤k} (P_t - t m1)²
        let m1 = pk / kf;
        let t2_left = sum_sq_idx(k);
        let left = a2[k] - 2.0 * m1 * b[k] + m1 * m1 * t2_left;

        // Σ_{t>k} (Q_t - s m2)², Q_t = P_t - P_k, s = t - k
        let m2 = (p[n] - pk) / rf;
        let a1r = a1[n] - a1[k];
        let a2r = a2[n] - a2[k];
        let br = b[n] - b[k];
        let sum_s = rf * (rf + 1.0) / 2.0;
        let t2_right = sum_sq_idx(n - k);
        let q2 = a2r - 2.0 * pk * a1r + rf * pk * pk;
        let sq = br - kf * a1r - pk * sum_s;
        let right = q2 - 2.0 * m2 * sq + m2 * m2 * t2_right;

        let v = left + right;
        let magnitude = a2[n] + m1 * m1 * t2_left + m2 * m2 * t2_right + rf * pk * pk;
        let v_floor = CANCELLATION_ULPS * f64::EPSILON * magnitude;
        let s_floor = CANCELLATION_ULPS * f64::EPSILON * abs_sum;

        let score = if v <= v_floor {
            if pk.abs() <= s_floor {
                0.0
            } else {
                DEGENERATE_CAP
            }
        } else {
            pk * pk * nf / v
        };
        scores.push(score);
    }
    LogScoreProfile::new(scores, ScoreKind::SelfNormalized)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Per-split recomputation straight from the definition, O(n²).
    pub(crate) fn self_normalized_direct(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let avg = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
        let grand = avg(x);
        let mut out = vec![0.0];
        for k in 1..n {
            let s_k: f64 = x[..k].iter().map(|v| v - grand).sum();
            let (m1, m2) = (avg(&x[..k]), avg(&x[k..]));
            let mut v = 0.0;
            let mut run = 0.0;
            for xi in &x[..k] {
                run += xi - m1;
                v += run * run;
            }
            run = 0.0;
            for xi in &x[k..] {
                run += xi - m2;
                v += run * run;
            }
            out.push(s_k * s_k / (v / n as f64));
        }
        out
    }

    fn series(v: &[f64]) -> Series {
        Series::unscaled(v.to_vec()).unwrap()
    }

    fn gaussian(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|i| {
                rng.sample::<f64, _>(rand_distr::StandardNormal) + if i > n / 3 { 0.7 } else { 0.0 }
            })
            .collect()
    }

    #[test]
    fn cusum_examples() {
        let p = cusum_profile(&series(&[0.0, 0.0, 2.0, 2.0]));
        assert_eq!(p.kind(), ScoreKind::Cusum);
        for (s, e) in p.scores().iter().zip([0.0, 0.5, 1.0, 0.5]) {
            assert_relative_eq!(*s, e, epsilon = 1e-15);
        }
        let p = cusum_profile(&series(&[3.0; 5]));
        assert!(p.scores().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn self_normalized_examples() {
        let p = self_normalized_profile(&series(&[0.0, 1.0, 3.0, 4.0])).unwrap();
        assert_eq!(p.kind(), ScoreKind::SelfNormalized);
        assert_eq!(p.scores()[0], 0.0);
        assert_relative_eq!(p.scores()[2], 72.0, max_relative = 1e-12);

        let p = self_normalized_profile(&series(&[0.0, 0.0, 2.0, 2.0])).unwrap();
        assert_eq!(p.scores()[2], DEGENERATE_CAP);
    }

    #[test]
    fn self_normalized_zero_over_zero() {
        let p = self_normalized_profile(&series(&[1.0; 6])).unwrap();
        assert!(p.scores().iter().all(|&s| s == 0.0));
    }

    #[test]
    fn self_normalized_needs_four() {
        assert!(self_normalized_profile(&series(&[0.0, 1.0, 2.0])).is_err());
    }

    #[test]
    fn fast_matches_direct() {
        for (seed, n) in [(1, 4), (2, 10), (3, 50), (4, 300)] {
            let x = gaussian(n, seed);
            let fast = self_normalized_profile(&series(&x)).unwrap();
            let direct = self_normalized_direct(&x);
            for (k, (f, d)) in fast.scores().iter().zip(&direct).enumerate() {
                assert_relative_eq!(*f, *d, max_relative = 1e-9, epsilon = 1e-12);
                let _ = k;
            }
        }
    }

    proptest! {
        #[test]
        fn fast_matches_direct_random(x in prop::collection::vec(-5.0f64..5.0, 4..60)) {
            let fast = self_normalized_profile(&series(&x)).unwrap();
            let direct = self_normalized_direct(&x);
            for (f, d) in fast.scores().iter().zip(&direct) {
                prop_assert!((f - d).abs() <= 1e-9 * d.abs().max(1e-3));
            }
        }

        #[test]
        fn shift_invariance(x in prop::collection::vec(-5.0f64..5.0, 4..40), c in -1e3f64..1e3) {
            let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
            let (a, b) = (cusum_profile(&series(&x)), cusum_profile(&series(&shifted)));
            for (p, q) in a.scores().iter().zip(b.scores()) {
                prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
            }
            let a = self_normalized_profile(&series(&x)).unwrap();
            let b = self_normalized_profile(&series(&shifted)).unwrap();
            for (p, q) in a.scores().iter().zip(b.scores()) {
                prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
            }
        }

        #[test]
        fn scale_behaviour(x in prop::collection::vec(-5.0f64..5.0, 4..40)) {
            let base_h = cusum_profile(&series(&x));
            let base_g = self_normalized_profile(&series(&x)).unwrap();
            for c in [0.01, 1.0, 100.0] {
                let scaled: Vec<f64> = x.iter().map(|v| v * c).collect();
                let h = cusum_profile(&series(&scaled));
                for (p, q) in base_h.scores().iter().zip(h.scores()) {
                    prop_assert!((c * p - q).abs() <= 1e-9 * q.abs().max(1e-9));
                }
                let g = self_normalized_profile(&series(&scaled)).unwrap();
                for (p, q) in base_g.scores().iter().zip(g.scores()) {
                    prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
                }
            }
        }
    }
}
