//! Analytic toolkit behind the rounding analysis, in checkable form.
//!
//! * [`taylor`]: arcsin Taylor coefficients, partial sums and tail bounds.
//! * [`gaussian`]: Gaussian band mass and Sheppard's orthant formula.
//! * [`psd`]: correlation matrices, entrywise powers and the weighted
//!   arcsin quadratic form.
//! * [`local_gain`]: Monte-Carlo estimate of the expected gain of flipping a
//!   vertex that landed in the candidate band.

pub mod gaussian;
pub mod local_gain;
pub mod psd;
pub mod taylor;

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use gaussian::{band_mass, band_mass_bounds, sheppard, sheppard_mc};
pub use local_gain::{estimate_local_gain, LocalGainEstimate, LocalGainParams};
pub use psd::{
    arcsin_form, check_arcsin_form, entrywise_arcsin_min_eigenvalue, entrywise_power_psd,
    CorrelationMatrix,
};
pub use taylor::{arcsin_coeff, arcsin_partial, check_arcsin_series, TaylorSeries};

/// Outcome of one verification check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Fitted or witnessed constants, by name.
    pub constants: Vec<(String, f64)>,
    /// Description of the tightest case seen.
    pub worst_case: String,
}

impl CheckResult {
    pub fn new(name: &str, pass: bool) -> Self {
        CheckResult {
            name: name.into(),
            pass,
            constants: Vec::new(),
            worst_case: String::new(),
        }
    }

    pub fn constant(mut self, name: &str, value: f64) -> Self {
        self.constants.push((name.into(), value));
        self
    }

    pub fn worst(mut self, desc: String) -> Self {
        self.worst_case = desc;
        self
    }
}
