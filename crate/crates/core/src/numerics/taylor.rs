//! Taylor series `arcsin(x) = Σ_k c_k x^(2k+1)` with
//! `c_k = (2k)! / (4^k (k!)² (2k+1))`.

use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::CheckResult;
use crate::error::{Error, Result};

/// Coefficients `c_0 ..= c_tau`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorSeries {
    pub tau: usize,
    pub coeffs: Vec<f64>,
}

impl TaylorSeries {
    /// Built with `c_{k+1} = c_k (2k+1)² / ((2k+2)(2k+3))`.
    pub fn new(tau: usize) -> Self {
        let mut coeffs = Vec::with_capacity(tau + 1);
        let mut c = 1.0_f64;
        for k in 0..=tau {
            coeffs.push(c);
            let kf = k as f64;
            c *= (2.0 * kf + 1.0) * (2.0 * kf + 1.0) / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        }
        TaylorSeries { tau, coeffs }
    }

    /// Compensated sum of `c_k x^(2k+1)` for `k ≤ tau`.
    pub fn partial(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut power = x;
        let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
        for &c in &self.coeffs {
            let y = c * power - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
            power *= x2;
        }
        sum
    }

    /// `Σ_{k ≤ tau} c_k`, i.e. the partial sum at `x = 1`.
    pub fn coefficient_sum(&self) -> f64 {
        self.partial(1.0)
    }

    /// `Σ_{k > tau} c_k |x|^(2k+1) / (tau^(-1/2) 4^(-tau))`, summed term by
    /// term in scaled form so that nothing underflows. Requires `|x| ≤ 1/2`.
    pub fn scaled_tail(&self, x: f64) -> f64 {
        let tau = self.tau;
        let ax = libm::fabs(x);
        let x2 = ax * ax;
        let mut c = *self.coeffs.last().unwrap_or(&1.0);
        let mut k = tau;
        // (4x²)^tau · x^(2(k−tau)) · |x| · √tau
        let mut weight = libm::pow(4.0 * x2, tau as f64) * ax * libm::sqrt(tau.max(1) as f64);
        let mut tail = 0.0;
        loop {
            let kf = k as f64;
            c *= (2.0 * kf + 1.0) * (2.0 * kf + 1.0) / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            k += 1;
            weight *= x2;
            let term = c * weight;
            tail += term;
            if term <= tail * 1e-18 || weight == 0.0 {
                return tail;
            }
        }
    }
}

/// `c_k` through the multiplicative recurrence.
pub fn arcsin_coeff(k: usize) -> f64 {
    *TaylorSeries::new(k).coeffs.last().expect("non-empty")
}

/// `Σ_{k ≤ tau} c_k x^(2k+1)` for `|x| ≤ 1`.
pub fn arcsin_partial(x: f64, tau: usize) -> Result<f64> {
    if !(libm::fabs(x) <= 1.0) {
        return Err(Error::Domain(format!("|x| = {} exceeds 1", libm::fabs(x))));
    }
    Ok(TaylorSeries::new(tau).partial(x))
}

/// Report of the three Taylor facts over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    /// `(tau, x)` where the partial sum exceeded `arcsin(x)` for `x > 0`.
    pub lower_bound_violations: Vec<(usize, f64)>,
    /// Largest `tail / (tau^(-1/2) 4^(-tau))` over `|x| ≤ 1/2`.
    pub fitted_tail_constant: f64,
    pub tail_worst: (usize, f64),
    /// `(tau, x)` where `|arcsin(x) − partial|` exceeded the series tail by
    /// more than rounding.
    pub tail_violations: Vec<(usize, f64)>,
    /// `(tau, (π/2 − Σ_{k≤tau} c_k) · √tau)`.
    pub normalized_gaps: Vec<(usize, f64)>,
    /// Largest ratio (≥ 1) between normalized gaps of consecutive taus.
    pub gap_ratio_spread: f64,
}

impl SeriesReport {
    pub fn passes(&self) -> bool {
        self.lower_bound_violations.is_empty()
            && self.tail_violations.is_empty()
            && self.gap_ratio_spread <= 2.0
            && self.fitted_tail_constant.is_finite()
    }

    pub fn to_checks(&self) -> Vec<CheckResult> {
        let mut out = Vec::new();
        out.push(
            CheckResult::new(
                "taylor_partial_below_arcsin",
                self.lower_bound_violations.is_empty(),
            )
            .constant("violations", self.lower_bound_violations.len() as f64)
            .worst(format!("{:?}", self.lower_bound_violations.first())),
        );
        out.push(
            CheckResult::new(
                "taylor_tail_half_interval",
                self.tail_violations.is_empty() && self.fitted_tail_constant.is_finite(),
            )
            .constant("fitted_K", self.fitted_tail_constant)
            .worst(format!("tau={} x={}", self.tail_worst.0, self.tail_worst.1)),
        );
        let mut gap = CheckResult::new("taylor_gap_at_one", self.gap_ratio_spread <= 2.0)
            .constant("max_consecutive_ratio", self.gap_ratio_spread);
        for &(tau, g) in &self.normalized_gaps {
            gap = gap.constant(&format!("gap_sqrt_tau@{tau}"), g);
        }
        out.push(gap);
        out
    }
}

/// Evaluates the three Taylor facts:
/// (1) partial sums sit below `arcsin(x)` for `x > 0`;
/// (2) for `|x| ≤ 1/2` the error is at most `K · tau^(-1/2) 4^(-tau)`, with
///     `K` fitted from the exact tail;
/// (3) `(π/2 − Σ_{k≤tau} c_k) √tau` changes by at most a factor 2 between
///     consecutive entries of `taus`.
pub fn check_arcsin_series(taus: &[usize], xs: &[f64]) -> Result<SeriesReport> {
    if let Some(&x) = xs.iter().find(|x| !(libm::fabs(**x) <= 1.0)) {
        return Err(Error::Domain(format!("grid point {x} outside [-1, 1]")));
    }
    let mut report = SeriesReport {
        lower_bound_violations: Vec::new(),
        fitted_tail_constant: 0.0,
        tail_worst: (0, 0.0),
        tail_violations: Vec::new(),
        normalized_gaps: Vec::new(),
        gap_ratio_spread: 1.0,
    };
    for &tau in taus {
        let series = TaylorSeries::new(tau);
        for &x in xs {
            let partial = series.partial(x);
            let exact = libm::asin(x);
            // once the tail drops below an ulp both sides are rounded values
            // of numbers that agree, so allow a couple of ulps
            if x > 0.0 && partial > exact + 2.0 * f64::EPSILON * exact {
                report.lower_bound_violations.push((tau, x));
            }
            if libm::fabs(x) <= 0.5 {
                let scaled = series.scaled_tail(x);
                if scaled > report.fitted_tail_constant {
                    report.fitted_tail_constant = scaled;
                    report.tail_worst = (tau, x);
                }
                let tail = scaled / libm::sqrt(tau.max(1) as f64) * libm::pow(0.25, tau as f64);
                // a few ulps of slack for libm's arcsin and the summation
                if libm::fabs(exact - partial) > tail + 4.0 * f64::EPSILON * libm::fabs(exact) {
                    report.tail_violations.push((tau, x));
                }
            }
        }
        let gap = core::f64::consts::FRAC_PI_2 - series.coefficient_sum();
        report
            .normalized_gaps
            .push((tau, gap * libm::sqrt(tau as f64)));
    }
    for pair in report.normalized_gaps.windows(2) {
        let r = pair[1].1 / pair[0].1;
        report.gap_ratio_spread = report.gap_ratio_spread.max(r.max(1.0 / r));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_coefficients() {
        assert_eq!(arcsin_coeff(0), 1.0);
        assert!((arcsin_coeff(1) - 1.0 / 6.0).abs() < 1e-16);
        assert!((arcsin_coeff(2) - 3.0 / 40.0).abs() < 1e-16);
        assert!((arcsin_coeff(3) - 5.0 / 112.0).abs() < 1e-16);
    }

    #[test]
    fn partial_sums() {
        assert_eq!(arcsin_partial(0.0, 10).unwrap(), 0.0);
        let p = arcsin_partial(0.5, 100).unwrap();
        assert!((p - libm::asin(0.5)).abs() < 1e-12);
        assert!(arcsin_partial(1.0, 100).unwrap() < core::f64::consts::FRAC_PI_2);
        assert!(arcsin_partial(1.5, 3).is_err());
    }

    #[test]
    fn odd_symmetry() {
        let s = TaylorSeries::new(40);
        for k in 0..=20 {
            let x = k as f64 / 20.0;
            assert_eq!(s.partial(-x), -s.partial(x));
        }
    }

    #[test]
    fn scaled_tail_matches_direct_sum() {
        // small tau keeps the direct tail representable
        let tau = 10;
        let s = TaylorSeries::new(tau);
        let big = TaylorSeries::new(400);
        let x: f64 = 0.5;
        let direct: f64 = (tau + 1..=400)
            .map(|k| big.coeffs[k] * x.powi(2 * k as i32 + 1))
            .sum();
        let scaled = s.scaled_tail(x) / (tau as f64).sqrt() * 0.25f64.powi(tau as i32);
        assert!((scaled - direct).abs() <= 1e-12 * direct);
    }
}
