//! Gaussian band mass and the orthant probability of two correlated normals.

use alloc::format;
use core::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::rng;

/// `Pr[g ∈ (0, eps)]` for `g ~ N(0, 1)`.
pub fn band_mass(eps: f64) -> f64 {
    0.5 * libm::erf(eps / SQRT_2)
}

/// Two-sided bounds `(eps/√(2π) · e^(−eps²/2), eps/√(2π))` on
/// [`band_mass`].
pub fn band_mass_bounds(eps: f64) -> (f64, f64) {
    let hi = eps / libm::sqrt(2.0 * PI);
    (hi * libm::exp(-0.5 * eps * eps), hi)
}

/// `Pr[g_1 ≥ 0 ∧ g_2 ≥ 0] = 1/2 − arccos(σ)/(2π)` for standard normals with
/// covariance `σ`.
pub fn sheppard(sigma: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&sigma) {
        return Err(Error::Domain(format!("covariance {sigma} outside [-1, 1]")));
    }
    Ok(0.5 - libm::acos(sigma) / (2.0 * PI))
}

/// Monte-Carlo estimate of the same orthant probability from `samples`
/// draws of `(z_1, σ z_1 + √(1−σ²) z_2)`.
pub fn sheppard_mc(sigma: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&sigma) {
        return Err(Error::Domain(format!("covariance {sigma} outside [-1, 1]")));
    }
    if samples < 1000 {
        return Err(Error::InvalidParameter(format!(
            "need at least 1000 samples, got {samples}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let tail = libm::sqrt(1.0 - sigma * sigma);
    let mut hits = 0_usize;
    for _ in 0..samples {
        let z1 = rng::normal(&mut rng);
        let z2 = rng::normal(&mut rng);
        let g2 = sigma * z1 + tail * z2;
        if z1 >= 0.0 && g2 >= 0.0 {
            hits += 1;
        }
    }
    Ok(hits as f64 / samples as f64)
}
