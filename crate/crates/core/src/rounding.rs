//! Random hyperplane rounding.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Assignment;
use crate::linalg::dot;
use crate::rng;
use crate::sdp::SdpEmbedding;

/// Standard Gaussian vector in the embedding's dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianSample {
    pub g: Vec<f64>,
    pub seed: u64,
}

impl GaussianSample {
    pub fn dim(&self) -> usize {
        self.g.len()
    }

    pub fn negated(&self) -> Self {
        GaussianSample {
            g: self.g.iter().map(|x| -x).collect(),
            seed: self.seed,
        }
    }
}

/// `r` i.i.d. standard normals from the stream keyed by `seed`.
pub fn sample_gaussian(r: usize, seed: u64) -> GaussianSample {
    let mut rng = rng::seeded(seed);
    GaussianSample {
        g: (0..r).map(|_| rng::normal(&mut rng)).collect(),
        seed,
    }
}

/// `⟨g, v_i⟩` for every vertex.
pub fn projections(emb: &SdpEmbedding, g: &GaussianSample) -> Result<Vec<f64>> {
    if g.dim() != emb.rank() {
        return Err(Error::DimensionMismatch {
            expected: emb.rank(),
            got: g.dim(),
        });
    }
    Ok((0..emb.n()).map(|i| dot(emb.row(i), &g.g)).collect())
}

#[inline]
pub fn sign(x: f64) -> i8 {
    if x < 0.0 {
        -1
    } else {
        1
    }
}

/// `x_i = sign(⟨g, v_i⟩)` with `sign(0) = +1`.
pub fn hyperplane_round(emb: &SdpEmbedding, g: &GaussianSample) -> Result<Assignment> {
    let proj = projections(emb, g)?;
    Assignment::new(proj.into_iter().map(sign).collect())
}
