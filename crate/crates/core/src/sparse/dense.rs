//! Small dense matrices and LU with partial pivoting.
//!
//! Used for coarsest-level AMG solves (at most a few hundred rows) and for
//! the dense test oracles; no attempt at BLAS-level performance.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows == 0 { 0 } else { rows[0].len() };
        let mut m = DenseMatrix::zeros(n_rows, n_cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), n_cols, "ragged rows");
            for (j, &v) in r.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for j in 0..self.n_cols {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn mul_mat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for j in 0..other.n_cols {
                let mut acc = 0.0;
                for k in 0..self.n_cols {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Dense inverse via LU; intended for test oracles on small matrices.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        let lu = DenseLuFactor::factor(self)?;
        let n = self.n_rows;
        let mut out = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = lu.solve_slice(&e)?;
            for i in 0..n {
                out.set(i, j, col[i]);
            }
            e[j] = 0.0;
        }
        Ok(out)
    }
}

/// LU factorization with partial pivoting of a square dense matrix.
#[derive(Debug, Clone)]
pub struct DenseLuFactor {
    n: usize,
    /// Combined L (unit lower, below diagonal) and U (upper) factors.
    lu: Vec<f64>,
    /// Row permutation: pivot row chosen at each elimination step.
    perm: Vec<usize>,
}

impl DenseLuFactor {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if a.n_rows() != a.n_cols() {
            return Err(Error::InvalidMatrix(format!(
                "LU of non-square {}x{} matrix",
                a.n_rows(),
                a.n_cols()
            )));
        }
        let n = a.n_rows();
        let mut lu = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(Error::Singular(format!("zero pivot at column {k}")));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                for j in (k + 1)..n {
                    lu[i * n + j] -= m * lu[k * n + j];
                }
            }
        }
        Ok(DenseLuFactor { n, lu, perm })
    }

    /// Factors the dense form of a sparse matrix.
    pub fn factor_csr(a: &super::CsrMatrix) -> Result<Self> {
        DenseLuFactor::factor(&a.to_dense())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn solve_slice(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "LU solve: size {} with rhs length {}",
                self.n,
                b.len()
            )));
        }
        let n = self.n;
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[i] = b[self.perm[i]];
        }
        // forward substitution with unit lower factor
        for i in 0..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc;
        }
        // backward substitution
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[i * n + j] * x[j];
            }
            x[i] = acc / self.lu[i * n + i];
        }
        Ok(x)
    }

    pub fn solve(&self, b: &super::DenseVector) -> Result<super::DenseVector> {
        Ok(super::DenseVector::from_raw(self.solve_slice(b.as_slice())?))
    }

    /// Recombines P^T L U; used to check factorization quality.
    pub fn reconstruct(&self) -> DenseMatrix {
        let n = self.n;
        let mut prod = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                let kmax = i.min(j);
                for k in 0..=kmax {
                    let l = if k == i { 1.0 } else { self.lu[i * n + k] };
                    let u = self.lu[k * n + j];
                    acc += l * u;
                }
                prod.set(i, j, acc);
            }
        }
        // undo the row permutation
        let mut out = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(self.perm[i], j, prod.get(i, j));
            }
        }
        out
    }
}
