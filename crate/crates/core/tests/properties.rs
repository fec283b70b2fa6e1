// SPDX-License-Identifier: MIT OR Apache-2.0

use std::collections::BTreeMap;

use cpwalk_core::altstat::{cusum_profile, self_normalized_profile};
use cpwalk_core::likelihood::{best_nonzero_split, log_likelihood_profile, mle_change_point};
use cpwalk_core::simulation::{run_replicates, simulate_series};
use cpwalk_core::walk::{normalize_scores, proposed_change_point, stationary_distribution};
use cpwalk_core::{monte_carlo_risk, ScenarioConfig, Series};
use proptest::prelude::*;

fn ratios(series: &Series) -> Vec<f64> {
    let p = log_likelihood_profile(series).unwrap();
    let s = p.scores();
    s.iter().map(|x| x - s[0]).collect()
}

fn values(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, 4..max_len)
}

proptest! {
    #[test]
    fn strict_false_alarm(seed in any::<u64>(), n in 2usize..400) {
        let s = simulate_series(&ScenarioConfig::new(n, 0, 0.0, 1, seed), 0).unwrap();
        let p = log_likelihood_profile(&s).unwrap();
        let best = p.scores()[1..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        prop_assert!(best > p.scores()[0]);
        prop_assert!(mle_change_point(&p) != 0);
    }

    #[test]
    fn ratio_profile_is_shift_invariant(x in values(120), c in -1e3f64..1e3) {
        let a = Series::new(x.clone(), Some(1.3)).unwrap();
        let b = Series::new(x.iter().map(|v| v + c).collect(), Some(1.3)).unwrap();
        for (p, q) in ratios(&a).iter().zip(ratios(&b)) {
            prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
        }
    }

    #[test]
    fn reversal_mirrors_ratio_profile(x in values(120)) {
        let n = x.len();
        let fwd = ratios(&Series::new(x.clone(), Some(0.7)).unwrap());
        let rev = ratios(&Series::new(x.iter().rev().copied().collect(), Some(0.7)).unwrap());
        for k in 1..n {
            prop_assert!((fwd[k] - rev[n - k]).abs() <= 1e-9 * fwd[k].abs().max(1.0));
        }
    }

    #[test]
    fn alternative_profiles_keep_walk_structure(x in values(80)) {
        let series = Series::unscaled(x).unwrap();
        let mut profiles = vec![cusum_profile(&series)];
        if let Ok(p) = self_normalized_profile(&series) {
            profiles.push(p);
        }
        for p in profiles {
            let mode = proposed_change_point(&stationary_distribution(&normalize_scores(&p)));
            prop_assert!(mode == 0 || mode == best_nonzero_split(&p));
        }
    }
}

#[test]
fn zero_count_partitions_over_mle_splits() {
    for (r, delta) in [(0, 0.0), (40, 0.5)] {
        let cfg = ScenarioConfig::new(120, r, delta, 4000, 17);
        let out = run_replicates(&cfg).unwrap();
        let zeros = out.iter().filter(|o| o.r_hat == 0).count();
        // per MLE split k: (replicates with r_mle = k, of which declared no change)
        let mut by_split: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for o in &out {
            let e = by_split.entry(o.r_mle).or_default();
            e.0 += 1;
            e.1 += usize::from(o.r_hat == 0);
        }
        let total: usize = by_split.values().map(|v| v.0).sum();
        let partitioned: usize = by_split.values().map(|v| v.1).sum();
        assert_eq!(total, out.len());
        assert_eq!(partitioned, zeros);
    }
}

/// Off-centre grid. At large shifts "no change" is declared in a handful of
/// replicates out of 10⁴, so the paired gain is allowed two standard errors.
#[test]
fn dominance_off_centre() {
    for n in [100usize, 200] {
        for r in [n / 4, 3 * n / 4] {
            for step in 1..=10 {
                let delta = step as f64 / 10.0;
                let out = run_replicates(&ScenarioConfig::new(n, r, delta, 10_000, 3)).unwrap();
                let gains: Vec<f64> = out.iter().map(|o| o.loss_mle - o.loss_proposed).collect();
                let m = gains.len() as f64;
                let mean = gains.iter().sum::<f64>() / m;
                let var = gains.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (m - 1.0);
                let se = (var / m).sqrt();
                assert!(
                    mean >= -2.0 * se,
                    "n={n} r={r} delta={delta}: gain {mean} (se {se})"
                );
            }
        }
    }
}

#[test]
fn relative_efficiency_falls_with_shift() {
    for n in [100usize, 200] {
        let re: Vec<f64> = (1..=10)
            .map(|step| {
                let cfg = ScenarioConfig::new(n, n / 2, step as f64 / 10.0, 10_000, 8);
                monte_carlo_risk(&cfg).unwrap().relative_efficiency
            })
            .collect();
        let rises = re.windows(2).filter(|w| w[1] > w[0]).count();
        assert!(rises <= 1, "n={n}: {re:?}");
    }
}

#[test]
fn reports_are_reproducible() {
    let cfg = ScenarioConfig::new(150, 60, 0.4, 2000, 5);
    let a = monte_carlo_risk(&cfg).unwrap();
    let b = monte_carlo_risk(&cfg.clone().with_workers(Some(3))).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.mean_loss_mle.to_bits(), b.mean_loss_mle.to_bits());
}
