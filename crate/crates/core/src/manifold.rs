// SPDX-License-Identifier: MIT OR Apache-2.0

//! The evolving-radius horn torus `M ⊂ R³` housing change location and size.
//!
//! A change at `t = r/n` with shift `Δ = tan θ` maps to
//!
//! ```text
//! u = t(1-t) · [(1 - cos θ) cos 2πt, (1 - cos θ) sin 2πt, sin θ]
//! ```
//!
//! `t = 0` and `θ = 0` both collapse to the origin, which encodes "no change".
//! Losses are measured with the zero-pass metric in `(t, θ)` coordinates.

use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{CpError, Result};
use crate::model::{ChangePointEstimate, Coordinates, ManifoldPoint};

/// Relative tolerance of the re-embedding check in [`unembed`].
pub const ROUNDTRIP_TOLERANCE: f64 = 1e-10;

fn radius_scale(t: f64) -> f64 {
    t * (1.0 - t)
}

/// Embeds `(t, θ)` with `t ∈ [0, 1)` and `θ ∈ (-π/2, π/2)`.
pub fn embed(t: f64, theta: f64) -> Result<ManifoldPoint> {
    if !(0.0..1.0).contains(&t) {
        return Err(CpError::invalid(format!("t = {t} outside [0, 1)")));
    }
    if !(theta.is_finite() && theta.abs() < FRAC_PI_2) {
        return Err(CpError::invalid(format!(
            "theta = {theta} outside (-pi/2, pi/2)"
        )));
    }
    Ok(embed_unchecked(t, theta))
}

pub(crate) fn embed_unchecked(t: f64, theta: f64) -> ManifoldPoint {
    if t == 0.0 || theta == 0.0 {
        return ManifoldPoint::ORIGIN;
    }
    let c = radius_scale(t);
    // 1 - cos θ = 2 sin²(θ/2), exact for small θ.
    let half = (0.5 * theta).sin();
    let radial = c * 2.0 * half * half;
    let (s, co) = (TAU * t).sin_cos();
    ManifoldPoint {
        u: [radial * co, radial * s, c * theta.sin()],
    }
}

impl ManifoldPoint {
    /// Accepts a raw triple only if it lies on `M`.
    pub fn checked(u: [f64; 3]) -> Result<Self> {
        let p = ManifoldPoint { u };
        unembed(&p)?;
        Ok(p)
    }
}

/// Recovers `(t, θ)` from a point on `M`; the origin maps to `(0, 0)`.
///
/// `t` comes from the quadrant-aware angle of `(u1, u2)`. `θ` uses the
/// half-angle form `tan(θ/2) = √(u1²+u2²) / u3`, which is equivalent to
/// `tan θ = u3 / (t(1-t) - √(u1²+u2²))` but keeps full precision near
/// `θ = 0` and `θ = ±π/2`.
pub fn unembed(p: &ManifoldPoint) -> Result<Coordinates> {
    if p.is_origin() {
        return Ok(Coordinates::NO_CHANGE);
    }
    let [u1, u2, u3] = p.u;
    if !(u1.is_finite() && u2.is_finite() && u3.is_finite()) || u3 == 0.0 {
        return Err(CpError::OffManifold);
    }
    let mut angle = u2.atan2(u1);
    if angle < 0.0 {
        angle += TAU;
    }
    let mut t = angle / TAU;
    if t >= 1.0 {
        t -= 1.0;
    }
    let rho = u1.hypot(u2);
    let theta = 2.0 * (rho / u3).atan();
    if t <= 0.0 || theta.abs() >= FRAC_PI_2 {
        return Err(CpError::OffManifold);
    }

    let back = embed_unchecked(t, theta).u;
    let err = ((back[0] - u1).powi(2) + (back[1] - u2).powi(2) + (back[2] - u3).powi(2)).sqrt();
    if err > ROUNDTRIP_TOLERANCE * p.norm() {
        return Err(CpError::OffManifold);
    }
    Ok(Coordinates::new(t, theta))
}

/// Zero-pass distance between two points given in `(t, θ)` coordinates.
///
/// Points sharing `t` are compared along their common fibre; all other pairs
/// are connected through the origin.
pub fn zero_pass_distance(a: Coordinates, b: Coordinates) -> f64 {
    if a.t == b.t {
        radius_scale(a.t) * (a.theta - b.theta).abs()
    } else {
        radius_scale(a.t) * a.theta.abs() + radius_scale(b.t) * b.theta.abs()
    }
}

/// Loss of one estimate against the truth.
pub fn loss(estimate: Coordinates, truth: Coordinates) -> f64 {
    zero_pass_distance(estimate, truth)
}

/// Losses of both estimators carried by a [`ChangePointEstimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateLosses {
    pub mle: f64,
    pub proposed: f64,
}

pub fn estimate_losses(estimate: &ChangePointEstimate, truth: Coordinates) -> EstimateLosses {
    EstimateLosses {
        mle: loss(estimate.mle_coordinates(), truth),
        proposed: loss(estimate.proposed_coordinates(), truth),
    }
}
