//! Seeded random streams.
//!
//! Every random quantity in the crate comes from a ChaCha8 stream keyed by a
//! `u64` seed, with normals drawn by the ziggurat sampler of `rand_distr`.
//! Sub-streams are derived with [`derive_seed`] so that trial `k` of a batch
//! does not depend on how many trials ran before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Identifier recorded in run reports.
pub const GENERATOR: &str = "chacha8/ziggurat-v1";

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 mixing of `(seed, stream)`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed
        ^ stream
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Standard normal conditioned on `(-eps, eps)`, by rejection from the
/// uniform proposal. Acceptance is at least `exp(-eps²/2)`.
pub fn truncated_normal<R: Rng + ?Sized>(rng: &mut R, eps: f64) -> f64 {
    loop {
        let x = eps * (2.0 * rng.random::<f64>() - 1.0);
        if x <= -eps || x >= eps {
            continue;
        }
        if rng.random::<f64>() < libm::exp(-0.5 * x * x) {
            return x;
        }
    }
}
