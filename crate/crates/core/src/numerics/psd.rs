//! Correlation matrices and the PSD facts used by the gain analysis.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::CheckResult;
use crate::error::{Error, Result};
use crate::linalg::{dot, min_eigenvalue, norm, Matrix};
use crate::rng;

/// Tolerance on the smallest eigenvalue for a matrix to count as PSD.
pub const PSD_TOL: f64 = 1e-8;

/// Symmetric PSD matrix with unit diagonal and entries in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(Matrix);

impl CorrelationMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        let d = m.dim();
        if !m.is_symmetric(1e-12) {
            return Err(Error::InvalidParameter(
                "correlation matrix must be symmetric".into(),
            ));
        }
        if let Some(i) = (0..d).find(|&i| libm::fabs(m[(i, i)] - 1.0) > 1e-9) {
            return Err(Error::InvalidParameter(format!(
                "diagonal entry {i} is {}",
                m[(i, i)]
            )));
        }
        if m.as_slice()
            .iter()
            .any(|v| !(libm::fabs(*v) <= 1.0 + 1e-12))
        {
            return Err(Error::InvalidParameter(
                "entries must lie in [-1, 1]".into(),
            ));
        }
        let lo = min_eigenvalue(&m);
        if lo < -PSD_TOL {
            return Err(Error::NotPsd(lo));
        }
        // clamp rounding spill so arcsin stays in its domain
        Ok(CorrelationMatrix(m.map(|v| v.clamp(-1.0, 1.0))))
    }

    pub fn identity(d: usize) -> Self {
        CorrelationMatrix(Matrix::identity(d))
    }

    pub fn all_ones(d: usize) -> Self {
        CorrelationMatrix(Matrix::from_fn(d, |_, _| 1.0))
    }

    /// Gram matrix of `d` unit vectors (rows of length `dim`).
    pub fn from_unit_rows(rows: &[f64], dim: usize) -> Result<Self> {
        let g = Matrix::gram(rows, dim);
        let d = g.dim();
        CorrelationMatrix::new(Matrix::from_fn(
            d,
            |i, j| if i == j { 1.0 } else { g[(i, j)] },
        ))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn min_entry(&self) -> f64 {
        self.0
            .as_slice()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn random_unit<R: Rng>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng::normal(rng)).collect();
        let len = norm(&v);
        if len > 1e-12 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

const ROW_ATTEMPTS: usize = 100_000;

/// Gram matrix of `d` random unit vectors in `R^dim`. A vector whose inner
/// product with an earlier one falls below `min_entry` is redrawn.
pub fn random_correlation<R: Rng>(
    d: usize,
    dim: usize,
    min_entry: f64,
    rng: &mut R,
) -> Result<CorrelationMatrix> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be positive".into()));
    }
    let mut rows: Vec<f64> = Vec::with_capacity(d * dim);
    for k in 0..d {
        let mut attempt = 0;
        let v = loop {
            attempt += 1;
            if attempt > ROW_ATTEMPTS {
                return Err(Error::BudgetExceeded {
                    what: format!("row {k} of a {d}x{d} correlation matrix in dimension {dim}"),
                    attempts: ROW_ATTEMPTS,
                });
            }
            let v = random_unit(dim, rng);
            if rows.chunks(dim).all(|u| dot(u, &v) >= min_entry) {
                break v;
            }
        };
        rows.extend(v);
    }
    CorrelationMatrix::from_unit_rows(&rows, dim)
}

/// Smallest eigenvalue of the entrywise `t`-th power of `a`.
pub fn entrywise_power_psd(a: &CorrelationMatrix, t: u32) -> Result<f64> {
    if t == 0 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    Ok(min_eigenvalue(
        &a.matrix().map(|v| libm::pow(v, f64::from(t))),
    ))
}

/// Smallest eigenvalue of the entrywise arcsin of `a`.
pub fn entrywise_arcsin_min_eigenvalue(a: &CorrelationMatrix) -> f64 {
    min_eigenvalue(&a.matrix().map(libm::asin))
}

/// `Σ_{i,j} w_i w_j arcsin(A_ij)`.
pub fn arcsin_form(a: &CorrelationMatrix, w: &[f64]) -> Result<f64> {
    let d = a.dim();
    if w.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: w.len(),
        });
    }
    if let Some(bad) = w.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::InvalidParameter(format!("weight {bad} is negative")));
    }
    let m = a.matrix();
    let mut total = 0.0;
    for i in 0..d {
        for j in 0..d {
            total += w[i] * w[j] * libm::asin(m[(i, j)]);
        }
    }
    Ok(total)
}

/// `arcsin_form · d √(ln d) / ‖w‖₁²`.
pub fn normalized_arcsin_form(a: &CorrelationMatrix, w: &[f64]) -> Result<f64> {
    let d = a.dim() as f64;
    let l1: f64 = w.iter().sum();
    if !(l1 > 0.0) {
        return Err(Error::InvalidParameter(
            "weights must not all be zero".into(),
        ));
    }
    Ok(arcsin_form(a, w)? * d * libm::sqrt(libm::log(d)) / (l1 * l1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcsinFormRow {
    pub d: usize,
    pub trials: usize,
    /// Smallest normalized value over the trials.
    pub min_normalized: f64,
    pub min_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArcsinFormReport {
    pub rows: Vec<ArcsinFormRow>,
}

impl ArcsinFormReport {
    pub fn passes(&self) -> bool {
        self.rows.iter().all(|r| r.min_value > 0.0)
    }

    pub fn to_check(&self) -> CheckResult {
        let mut c = CheckResult::new("arcsin_form_positive", self.passes());
        let mut worst = (f64::INFINITY, 0);
        for r in &self.rows {
            c = c.constant(&format!("min_normalized@d={}", r.d), r.min_normalized);
            if r.min_normalized < worst.0 {
                worst = (r.min_normalized, r.d);
            }
        }
        c.worst(format!("d={} normalized={}", worst.1, worst.0))
    }
}

/// Random correlation matrices with entries at least `-1/2` (in a random
/// dimension between 2 and `d`) and random nonnegative weights; records the
/// smallest normalized arcsin form per `d`.
pub fn check_arcsin_form(trials: usize, d_list: &[usize], seed: u64) -> Result<ArcsinFormReport> {
    let mut rows = Vec::new();
    for (slot, &d) in d_list.iter().enumerate() {
        if d < 2 {
            return Err(Error::InvalidParameter(format!(
                "d = {d} must be at least 2"
            )));
        }
        let mut rng = rng::seeded(rng::derive_seed(seed, slot as u64));
        let mut row = ArcsinFormRow {
            d,
            trials,
            min_normalized: f64::INFINITY,
            min_value: f64::INFINITY,
        };
        for _ in 0..trials {
            let dim = rng.random_range(2..=d);
            let a = random_correlation(d, dim, -0.5, &mut rng)?;
            let mut w: Vec<f64> = (0..d)
                .map(|_| {
                    if rng.random::<f64>() < 0.3 {
                        0.0
                    } else {
                        rng.random::<f64>()
                    }
                })
                .collect();
            if w.iter().all(|&x| x == 0.0) {
                w[0] = 1.0;
            }
            let value = arcsin_form(&a, &w)?;
            row.min_value = row.min_value.min(value);
            row.min_normalized = row.min_normalized.min(normalized_arcsin_form(&a, &w)?);
        }
        rows.push(row);
    }
    Ok(ArcsinFormReport { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    #[test]
    fn identity_and_ones_forms() {
        for d in [2, 5, 9] {
            let ones = alloc::vec![1.0; d];
            let v = arcsin_form(&CorrelationMatrix::identity(d), &ones).unwrap();
            assert!((v - FRAC_PI_2 * d as f64).abs() < 1e-12);
            let v = arcsin_form(&CorrelationMatrix::all_ones(d), &ones).unwrap();
            assert!((v - FRAC_PI_2 * (d * d) as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn single_weight_normalization() {
        let d = 6;
        let mut w = alloc::vec![0.0; d];
        w[0] = 1.0;
        let a = CorrelationMatrix::identity(d);
        let n = normalized_arcsin_form(&a, &w).unwrap();
        assert!((n - FRAC_PI_2 * 6.0 * libm::sqrt(libm::log(6.0))).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(arcsin_form(&CorrelationMatrix::identity(2), &[1.0, -0.5]).is_err());
        assert!(arcsin_form(&CorrelationMatrix::identity(2), &[1.0]).is_err());
        let not_psd = Matrix::from_rows(
            3,
            alloc::vec![1.0, -0.9, -0.9, -0.9, 1.0, -0.9, -0.9, -0.9, 1.0],
        )
        .unwrap();
        assert!(matches!(
            CorrelationMatrix::new(not_psd),
            Err(Error::NotPsd(_))
        ));
        let bad_diag = Matrix::from_rows(2, alloc::vec![2.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(CorrelationMatrix::new(bad_diag).is_err());
    }

    #[test]
    fn power_of_identity_and_ones() {
        for t in [1, 3, 5, 9] {
            assert!(
                (entrywise_power_psd(&CorrelationMatrix::identity(4), t).unwrap() - 1.0).abs()
                    < 1e-12
            );
            assert!(
                entrywise_power_psd(&CorrelationMatrix::all_ones(4), t)
                    .unwrap()
                    .abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn bounded_generator_respects_floor() {
        let mut rng = rng::seeded(5);
        for d in [2, 7, 20] {
            let a = random_correlation(d, 3, -0.5, &mut rng).unwrap();
            assert!(a.min_entry() >= -0.5);
        }
    }

    #[test]
    fn arcsin_form_check_is_reproducible() {
        let a = check_arcsin_form(20, &[3, 8], 4).unwrap();
        let b = check_arcsin_form(20, &[3, 8], 4).unwrap();
        assert_eq!(a, b);
        assert!(a.passes());
    }
}
