//! Approximation pipeline for weighted Max-2LIN (and Max-Cut) on graphs of
//! bounded degree.
//!
//! The pipeline has three stages:
//!
//! 1. [`sdp::solve_sdp`] finds unit vectors maximizing the vector relaxation,
//!    strengthened by signed ℓ₂² triangle inequalities.
//! 2. [`rounding::hyperplane_round`] rounds the vectors with a random
//!    Gaussian hyperplane.
//! 3. [`localsearch`] collects the vertices whose projection lies in a thin
//!    band around the hyperplane and flips those whose violated neighbours
//!    outweigh everything else.
//!
//! [`oracle`] gives the exact optimum for small instances and [`numerics`]
//! carries the analytic toolkit (arcsin Taylor coefficients, Sheppard's
//! formula, entrywise-power PSD closure, Monte-Carlo local-gain estimates).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the experiment
//! runner and the command-line interface live in the `bdcut` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod error;
pub mod instance;
pub mod linalg;
pub mod localsearch;
pub mod numerics;
pub mod oracle;
pub mod rng;
pub mod rounding;
pub mod sdp;

pub use error::{Error, Result};
pub use instance::{Assignment, Edge, Max2LinInstance, WeightLaw};
pub use localsearch::{CandidateAnalysis, Epsilon, RunReport};
pub use oracle::OracleResult;
pub use rounding::GaussianSample;
pub use sdp::{SdpConfig, SdpEmbedding, SdpReport, TriangleMode};
