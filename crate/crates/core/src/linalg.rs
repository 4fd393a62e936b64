//! Dense symmetric-matrix algebra at small dimension.
//!
//! Everything here is sized for covariance matrices with d up to a few
//! dozen: a cyclic Jacobi eigensolver, `M^{-1/2}` through the spectral
//! decomposition, the spectral norm and a Cholesky factorization for
//! Gaussian sampling.

use crate::{Error, Result};

/// Symmetric d x d matrix, dense row-major, stored canonically
/// (the constructor symmetrizes and rejects asymmetric input).
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds from row-major entries; entries must be symmetric to within
    /// 1e-12 relative and are stored exactly symmetrized.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("matrix dimension must be >= 1"));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        let scale = data.iter().fold(0.0f64, |a, x| a.max(x.abs())).max(1.0);
        let mut data = data;
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = data[i * dim + j];
                let b = data[j * dim + i];
                if (a - b).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                let m = 0.5 * (a + b);
                data[i * dim + j] = m;
                data[j * dim + i] = m;
            }
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(SymMatrix { dim, data })
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = 1.0;
        }
        SymMatrix { dim, data }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut data = vec![0.0; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = diag[i];
        }
        SymMatrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.dim)
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// y = M x
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self
            .rows()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// M * other (result need not be symmetric; returned as raw row-major).
    pub fn mul_raw(&self, other: &SymMatrix) -> Vec<f64> {
        let d = self.dim;
        let mut out = vec![0.0; d * d];
        for i in 0..d {
            for k in 0..d {
                let a = self.data[i * d + k];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    /// Max-abs entry of M*A*M - I, used by the inverse-square-root checks.
    pub fn sandwich_residual(&self, a: &SymMatrix) -> f64 {
        let d = self.dim;
        let ma = self.mul_raw(a);
        let mut worst = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                let mut v = 0.0;
                for k in 0..d {
                    v += ma[i * d + k] * self.data[k * d + j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        worst
    }

    /// Serializes as CSV, one row per line.
    pub fn to_csv(&self) -> String {
        self.rows()
            .map(|row| {
                row.iter()
                    .map(|v| format!("{v:.17e}"))
                    .collect::<Vec<_>>()
                    .join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Parses the CSV form produced by [`SymMatrix::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .map(|tok| {
                    tok.trim().parse::<f64>().map_err(|e| Error::Parse {
                        line: lineno + 1,
                        message: format!("bad number {tok:?}: {e}"),
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("matrix CSV is not square"));
        }
        SymMatrix::new(dim, rows.concat())
    }
}

/// Eigenvalues (nondecreasing) with matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column k of this row-major matrix is the eigenvector for eigenvalue k.
    pub eigenvectors: Vec<f64>,
    pub dim: usize,
}

impl SpectralDecomposition {
    /// Rebuilds Q diag(f(lambda)) Q^T as a symmetric matrix.
    pub fn assemble(&self, f: impl Fn(f64) -> f64) -> SymMatrix {
        let d = self.dim;
        let q = &self.eigenvectors;
        let mut data = vec![0.0; d * d];
        for k in 0..d {
            let fv = f(self.eigenvalues[k]);
            for i in 0..d {
                let qik = q[i * d + k];
                if qik == 0.0 {
                    continue;
                }
                for j in i..d {
                    data[i * d + j] += fv * qik * q[j * d + k];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                data[i * d + j] = data[j * d + i];
            }
        }
        SymMatrix { dim: d, data }
    }
}

fn off_diagonal_norm(a: &[f64], d: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..d {
        for j in 0..d {
            if i != j {
                s += a[i * d + j] * a[i * d + j];
            }
        }
    }
    s.sqrt()
}

/// Spectral decomposition by cyclic Jacobi rotations.
///
/// Converges when the off-diagonal Frobenius norm drops below
/// 1e-13 * ||M||_F; capped at 100 sweeps.
pub fn sym_eigen(m: &SymMatrix) -> Result<SpectralDecomposition> {
    let d = m.dim;
    let mut a = m.data.clone();
    let mut q = vec![0.0; d * d];
    for i in 0..d {
        q[i * d + i] = 1.0;
    }
    let frob = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
    let tol = 1e-13 * frob;
    let mut converged = false;
    for _sweep in 0..100 {
        if off_diagonal_norm(&a, d) < tol {
            converged = true;
            break;
        }
        for p in 0..d {
            for r in (p + 1)..d {
                let apr = a[p * d + r];
                if apr.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * d + p];
                let arr = a[r * d + r];
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // A <- J^T A J on rows/cols p,r
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akr = a[k * d + r];
                    a[k * d + p] = c * akp - s * akr;
                    a[k * d + r] = s * akp + c * akr;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let ark = a[r * d + k];
                    a[p * d + k] = c * apk - s * ark;
                    a[r * d + k] = s * apk + c * ark;
                }
                for k in 0..d {
                    let qkp = q[k * d + p];
                    let qkr = q[k * d + r];
                    q[k * d + p] = c * qkp - s * qkr;
                    q[k * d + r] = s * qkp + c * qkr;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a, d) >= tol {
        return Err(Error::EigenNoConvergence {
            sweeps: 100,
            residual: off_diagonal_norm(&a, d),
        });
    }
    // sort eigenvalues nondecreasing, permuting eigenvector columns
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| a[i * d + i].partial_cmp(&a[j * d + j]).unwrap());
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a[k * d + k]).collect();
    let mut eigenvectors = vec![0.0; d * d];
    for (new_k, &old_k) in order.iter().enumerate() {
        for i in 0..d {
            eigenvectors[i * d + new_k] = q[i * d + old_k];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        dim: d,
    })
}

/// Scale-relative default tolerance for positive definiteness.
pub fn default_pd_tol(m: &SymMatrix) -> f64 {
    1e-12 * (m.trace() / m.dim as f64).abs().max(f64::MIN_POSITIVE)
}

/// M^{-1/2} for symmetric positive definite M.
pub fn inv_sqrt(m: &SymMatrix, tol: f64) -> Result<SymMatrix> {
    let dec = sym_eigen(m)?;
    let min = dec.eigenvalues[0];
    if min <= tol {
        return Err(Error::NotPositiveDefinite {
            eigenvalue: min,
            tol,
        });
    }
    Ok(dec.assemble(|l| 1.0 / l.sqrt()))
}

/// Spectral norm: max |eigenvalue| for symmetric input.
pub fn operator_norm(m: &SymMatrix) -> Result<f64> {
    let dec = sym_eigen(m)?;
    Ok(dec
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, l| acc.max(l.abs())))
}

/// Cholesky factor L (lower triangular, row-major d x d) with L L^T = M.
pub fn cholesky(m: &SymMatrix) -> Result<Vec<f64>> {
    let d = m.dim;
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite {
                        eigenvalue: s,
                        tol: 0.0,
                    });
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Ok(l)
}
