//! Monte-Carlo estimate of the expected gain of flipping a candidate vertex.
//!
//! The centre sits at `e_1` and neighbour `j` at
//! `ρ e_1 + √(1−ρ²) v̂_j`, where the signed Gram matrix of the `v̂_j` is the
//! given correlation matrix. Writing `g = (g_1, g')`, the signed projection
//! of neighbour `j` is `ρ g_1 + √(1−ρ²) h_j` with `h ~ N(0, Σ)`. Samples are
//! drawn conditioned on the centre being a candidate (`|g_1| < ε`) and the
//! gain `max(0, 2·w(B) − W)` is averaged.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::gaussian::band_mass_bounds;
use super::psd::CorrelationMatrix;
use crate::constants::{rho_star, RHO_WINDOW};
use crate::error::{Error, Result};
use crate::linalg::psd_sqrt;
use crate::rng;

/// Smallest signed correlation between neighbour directions that the
/// triangle inequalities allow near the worst-case correlation.
pub const MIN_NEIGHBOR_CORRELATION: f64 = -0.2;

#[derive(Debug, Clone, PartialEq)]
pub struct LocalGainParams {
    pub neighbor_gram: CorrelationMatrix,
    /// Signed correlation `b_ij ⟨v_i, v_j⟩` shared by all neighbours.
    pub rho: f64,
    pub weights: Vec<f64>,
    pub c: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalGainEstimate {
    pub d: usize,
    pub epsilon: f64,
    pub incident_weight: f64,
    /// Conditional mean of the gain.
    pub mean: f64,
    pub std_err: f64,
    /// `mean · d √(ln d) / W`.
    pub normalized: f64,
    pub samples: usize,
    /// Fraction of unconditioned draws with `|g_1| < ε`.
    pub membership_rate: f64,
    pub membership_std_err: f64,
    /// Two-sided bound on `Pr[|g_1| < ε]`.
    pub membership_bounds: (f64, f64),
}

impl LocalGainParams {
    fn validate(&self) -> Result<(usize, f64)> {
        let d = self.neighbor_gram.dim();
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "degree {d} must be at least 2"
            )));
        }
        if self.weights.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: self.weights.len(),
            });
        }
        if self.weights.iter().any(|w| !(*w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidParameter(
                "weights must be finite and nonnegative".into(),
            ));
        }
        if !(libm::fabs(self.rho - rho_star()) <= RHO_WINDOW + 1e-12) {
            return Err(Error::InvalidParameter(format!(
                "rho = {} outside the window {} ± {RHO_WINDOW}",
                self.rho,
                rho_star()
            )));
        }
        if self.neighbor_gram.min_entry() < MIN_NEIGHBOR_CORRELATION - 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "neighbour correlation {} below {MIN_NEIGHBOR_CORRELATION}",
                self.neighbor_gram.min_entry()
            )));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(
                "constant C must be positive".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be positive".into()));
        }
        let dd = d as f64;
        Ok((d, 1.0 / (self.c * dd * libm::sqrt(libm::log(dd)))))
    }
}

/// Per-sample gains, conditioned on `|g_1| < ε`.
pub fn sample_local_gains(params: &LocalGainParams) -> Result<Vec<f64>> {
    let (d, eps) = params.validate()?;
    let root = psd_sqrt(params.neighbor_gram.matrix(), super::psd::PSD_TOL)?;
    let total: f64 = params.weights.iter().sum();
    let spread = libm::sqrt(1.0 - params.rho * params.rho);
    let mut rng = rng::seeded(rng::derive_seed(params.seed, 0));
    let mut z = alloc::vec![0.0; d];
    let mut gains = Vec::with_capacity(params.trials);
    for _ in 0..params.trials {
        let g1 = rng::truncated_normal(&mut rng, eps);
        let xi = if g1 < 0.0 { -1.0 } else { 1.0 };
        z.iter_mut().for_each(|v| *v = rng::normal(&mut rng));
        let mut b_weight = 0.0;
        for j in 0..d {
            let h: f64 = (0..d).map(|k| root[(j, k)] * z[k]).sum();
            let y = params.rho * g1 + spread * h;
            if libm::fabs(y) < eps {
                continue; // A: the neighbour is a candidate too
            }
            if xi * y <= -eps {
                b_weight += params.weights[j];
            }
        }
        gains.push((2.0 * b_weight - total).max(0.0));
    }
    Ok(gains)
}

/// Conditional mean gain with its standard error, plus the unconditional
/// rate at which the centre lands in the band.
pub fn estimate_local_gain(params: &LocalGainParams) -> Result<LocalGainEstimate> {
    let (d, eps) = params.validate()?;
    let gains = sample_local_gains(params)?;
    let nf = gains.len() as f64;
    let mean = gains.iter().sum::<f64>() / nf;
    let var = if gains.len() > 1 {
        gains.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    let total: f64 = params.weights.iter().sum();

    let mut rng = rng::seeded(rng::derive_seed(params.seed, 1));
    let hits = (0..params.trials)
        .filter(|_| libm::fabs(rng::normal(&mut rng)) < eps)
        .count();
    let rate = hits as f64 / nf;
    let (lo, hi) = band_mass_bounds(eps);
    let p = lo + hi;

    let dd = d as f64;
    Ok(LocalGainEstimate {
        d,
        epsilon: eps,
        incident_weight: total,
        mean,
        std_err: libm::sqrt(var / nf),
        normalized: if total > 0.0 {
            mean * dd * libm::sqrt(libm::log(dd)) / total
        } else {
            0.0
        },
        samples: gains.len(),
        membership_rate: rate,
        membership_std_err: libm::sqrt(p * (1.0 - p) / nf),
        membership_bounds: (2.0 * lo, 2.0 * hi),
    })
}
