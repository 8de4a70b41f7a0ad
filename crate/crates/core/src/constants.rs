//! The worst-case correlation of hyperplane rounding and the resulting ratio.

use core::f64::consts::PI;

/// Ratio between the probability that hyperplane rounding satisfies a
/// constraint with signed correlation `rho` and that constraint's SDP value.
pub fn rounding_ratio(rho: f64) -> f64 {
    (1.0 + 2.0 / PI * libm::asin(rho)) / (1.0 + rho)
}

/// `(rho_star, alpha_gw)`: minimizer and minimum of [`rounding_ratio`] over
/// `(-1, 1]`, found by golden-section search.
pub fn worst_case_correlation() -> (f64, f64) {
    // The ratio is unimodal on [0, 1); its minimum sits near 0.69.
    let inv_phi = (libm::sqrt(5.0) - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0_f64, 0.999_f64);
    let mut a = hi - inv_phi * (hi - lo);
    let mut b = lo + inv_phi * (hi - lo);
    let (mut fa, mut fb) = (rounding_ratio(a), rounding_ratio(b));
    while hi - lo > 1e-13 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = rounding_ratio(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = rounding_ratio(b);
        }
    }
    let rho = 0.5 * (lo + hi);
    (rho, rounding_ratio(rho))
}

/// Worst-case correlation, about 0.689.
pub fn rho_star() -> f64 {
    worst_case_correlation().0
}

/// Worst-case ratio of hyperplane rounding, about 0.878.
pub fn alpha_gw() -> f64 {
    worst_case_correlation().1
}

/// Half-width of the correlation window around [`rho_star`].
pub const RHO_WINDOW: f64 = 0.01;
