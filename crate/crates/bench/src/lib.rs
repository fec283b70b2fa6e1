// SPDX-License-Identifier: MIT OR Apache-2.0

//! Inputs shared by the benchmarks and the linear-time check.

use cpwalk_core::simulation::simulate_series;
use cpwalk_core::{ScenarioConfig, Series};

/// Unit-variance Gaussian series of length `n` with a half-sigma shift at `n/2`.
pub fn shifted_series(n: usize, seed: u64) -> Series {
    simulate_series(&ScenarioConfig::new(n, n / 2, 0.5, 1, seed), 0).expect("valid scenario")
}

/// The same series without a known sigma.
pub fn shifted_series_unscaled(n: usize, seed: u64) -> Series {
    Series::unscaled(shifted_series(n, seed).values().to_vec()).expect("finite values")
}
