//! Small dense linear algebra: row-major square matrices and a cyclic Jacobi
//! eigensolver for symmetric matrices.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Dense row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(Matrix { n, data })
    }

    /// Gram matrix of the given rows, each of length `dim`.
    pub fn gram(rows: &[f64], dim: usize) -> Self {
        let n = if dim == 0 { 0 } else { rows.len() / dim };
        Matrix::from_fn(n, |i, j| {
            dot(&rows[i * dim..(i + 1) * dim], &rows[j * dim..(j + 1) * dim])
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| libm::fabs(self[(i, j)] - self[(j, i)]) <= tol))
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

/// Eigenvalues (ascending) and eigenvectors (columns of the returned matrix,
/// in the same order) of a symmetric matrix.
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

const JACOBI_SWEEPS: usize = 100;

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn symmetric_eigen(a: &Matrix) -> SymmetricEigen {
    let n = a.dim();
    let mut m = a.clone();
    let mut q = Matrix::identity(n);
    let scale: f64 = a
        .as_slice()
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for r in p + 1..n {
                let apr = m[(p, r)];
                if apr == 0.0 {
                    continue;
                }
                let theta = (m[(r, r)] - m[(p, p)]) / (2.0 * apr);
                let t = libm::copysign(1.0, theta)
                    / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkr = m[(k, r)];
                    m[(k, p)] = c * mkp - s * mkr;
                    m[(k, r)] = s * mkp + c * mkr;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mrk = m[(r, k)];
                    m[(p, k)] = c * mpk - s * mrk;
                    m[(r, k)] = s * mpk + c * mrk;
                }
                for k in 0..n {
                    let qkp = q[(k, p)];
                    let qkr = q[(k, r)];
                    q[(k, p)] = c * qkp - s * qkr;
                    q[(k, r)] = s * qkp + c * qkr;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[(x, x)].total_cmp(&m[(y, y)]));
    let values = order.iter().map(|&k| m[(k, k)]).collect();
    let vectors = Matrix::from_fn(n, |i, j| q[(i, order[j])]);
    SymmetricEigen { values, vectors }
}

pub fn min_eigenvalue(a: &Matrix) -> f64 {
    symmetric_eigen(a)
        .values
        .first()
        .copied()
        .unwrap_or(f64::INFINITY)
}

/// Factor `L` (row-major, `n × n`) with `L Lᵀ = a`, built from the
/// eigendecomposition so that singular PSD matrices are accepted. Fails when
/// the smallest eigenvalue is below `-tol`.
pub fn psd_sqrt(a: &Matrix, tol: f64) -> Result<Matrix> {
    let eig = symmetric_eigen(a);
    let n = a.dim();
    if let Some(&lo) = eig.values.first() {
        if lo < -tol {
            return Err(Error::NotPsd(lo));
        }
    }
    let roots: Vec<f64> = eig.values.iter().map(|&v| libm::sqrt(v.max(0.0))).collect();
    Ok(Matrix::from_fn(n, |i, j| eig.vectors[(i, j)] * roots[j]))
}
