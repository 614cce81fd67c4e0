//! Sparse and dense linear-algebra kernels used by every other module.
//!
//! All kernels accumulate in a fixed left-to-right (ascending column index)
//! order so repeated runs are bitwise identical under the same floating-point
//! environment.

mod dense;
pub mod io;
mod vec_ops;

pub use dense::{DenseLuFactor, DenseMatrix};
pub use vec_ops::{axpy, dot, norm2, scale, sub_into};

use crate::error::{Error, Result};

/// Dense vector of finite `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector(Vec<f64>);

impl DenseVector {
    /// Validating constructor: rejects NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidVector(format!(
                "non-finite entry {} at index {i}",
                values[i]
            )));
        }
        Ok(DenseVector(values))
    }

    pub fn zeros(n: usize) -> Self {
        DenseVector(vec![0.0; n])
    }

    pub fn from_elem(n: usize, v: f64) -> Self {
        DenseVector(vec![v; n])
    }

    /// Wraps values that are already known to be finite (outputs of kernels).
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        DenseVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }
}

impl std::ops::Deref for DenseVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl std::ops::DerefMut for DenseVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

/// Sparse matrix in compressed-row (CSR) form.
///
/// Invariants, enforced by [`CsrMatrix::new`]:
/// * `row_ptr` is non-decreasing, starts at 0 and ends at `nnz`;
/// * column indices are strictly increasing within each row and `< n_cols`;
/// * all values are finite.
///
/// Explicit stored zeros are permitted; [`CsrMatrix::drop_explicit_zeros`]
/// canonicalizes when needed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidMatrix(format!(
                "row_ptr length {} for {} rows",
                row_ptr.len(),
                n_rows
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidMatrix("row_ptr[0] must be 0".into()));
        }
        if row_ptr[n_rows] != col_idx.len() || col_idx.len() != values.len() {
            return Err(Error::InvalidMatrix(format!(
                "row_ptr end {} vs {} column indices vs {} values",
                row_ptr[n_rows],
                col_idx.len(),
                values.len()
            )));
        }
        for i in 0..n_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidMatrix(format!("row_ptr decreases at row {i}")));
            }
            let mut prev: Option<usize> = None;
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = col_idx[k];
                if j >= n_cols {
                    return Err(Error::InvalidMatrix(format!(
                        "column index {j} out of bounds in row {i}"
                    )));
                }
                if let Some(p) = prev {
                    if j <= p {
                        return Err(Error::InvalidMatrix(format!(
                            "column indices not strictly increasing in row {i}"
                        )));
                    }
                }
                prev = Some(j);
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix(format!(
                "non-finite value {} at entry {k}",
                values[k]
            )));
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from (row, col, value) triplets; duplicates are summed in
    /// input order.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut per_row: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_rows];
        for &(i, j, v) in triplets {
            if i >= n_rows || j >= n_cols {
                return Err(Error::InvalidMatrix(format!("triplet ({i},{j}) out of bounds")));
            }
            per_row[i].push((j, v));
        }
        let mut row_ptr = Vec::with_capacity(n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for row in &mut per_row {
            row.sort_by_key(|&(j, _)| j);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = row[k].1;
                k += 1;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix::new(n_rows, n_cols, row_ptr, col_idx, values)
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..m.n_rows() {
            for j in 0..m.n_cols() {
                let v = m.get(i, j);
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                d.set(i, self.col_idx[k], self.values[k]);
            }
        }
        d
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// (column, value) pairs of row `i` in ascending column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k],
            Err(_) => 0.0,
        }
    }

    /// y = A x, accumulated left-to-right within each row.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n_cols, "spmv: x length");
        assert_eq!(y.len(), self.n_rows, "spmv: y length");
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    pub fn spmv(&self, x: &DenseVector) -> Result<DenseVector> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "spmv: {}x{} matrix with vector of length {}",
                self.n_rows,
                self.n_cols,
                x.len()
            )));
        }
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(DenseVector::from_raw(y))
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols];
        for &j in &self.col_idx {
            counts[j] += 1;
        }
        let mut row_ptr = vec![0usize; self.n_cols + 1];
        for j in 0..self.n_cols {
            row_ptr[j + 1] = row_ptr[j] + counts[j];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col_idx[k];
                let pos = next[j];
                col_idx[pos] = i;
                values[pos] = self.values[k];
                next[j] += 1;
            }
        }
        // Scanning rows in ascending order leaves each transposed row sorted.
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Sparse matrix product `self * other` (Gustavson's algorithm): a
    /// symbolic pass collects each output row's pattern, the numeric pass
    /// then emits entries in ascending column order.
    pub fn matmul(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch(format!(
                "matmul: {}x{} by {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut acc = vec![0.0; other.n_cols];
        let mut marker = vec![usize::MAX; other.n_cols];
        let mut touched: Vec<usize> = Vec::new();
        for i in 0..self.n_rows {
            for ka in self.row_ptr[i]..self.row_ptr[i + 1] {
                let k = self.col_idx[ka];
                let a_ik = self.values[ka];
                for kb in other.row_ptr[k]..other.row_ptr[k + 1] {
                    let j = other.col_idx[kb];
                    if marker[j] != i {
                        marker[j] = i;
                        touched.push(j);
                    }
                    acc[j] += a_ik * other.values[kb];
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_idx.push(j);
                values.push(acc[j]);
                acc[j] = 0.0;
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: other.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Entrywise sum with union sparsity.
    pub fn add(&self, other: &CsrMatrix) -> Result<CsrMatrix> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch(format!(
                "add: {}x{} with {}x{}",
                self.n_rows, self.n_cols, other.n_rows, other.n_cols
            )));
        }
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..self.n_rows {
            let (mut a, enda) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let (mut b, endb) = (other.row_ptr[i], other.row_ptr[i + 1]);
            while a < enda || b < endb {
                let ja = if a < enda { self.col_idx[a] } else { usize::MAX };
                let jb = if b < endb { other.col_idx[b] } else { usize::MAX };
                if ja == jb {
                    col_idx.push(ja);
                    values.push(self.values[a] + other.values[b]);
                    a += 1;
                    b += 1;
                } else if ja < jb {
                    col_idx.push(ja);
                    values.push(self.values[a]);
                    a += 1;
                } else {
                    col_idx.push(jb);
                    values.push(other.values[b]);
                    b += 1;
                }
            }
            row_ptr.push(col_idx.len());
        }
        Ok(CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// diag(left) * A * diag(right); pattern unchanged.
    pub fn scale_outer(&self, left: &[f64], right: &[f64]) -> CsrMatrix {
        assert_eq!(left.len(), self.n_rows);
        assert_eq!(right.len(), self.n_cols);
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.values[k] = left[i] * self.values[k] * right[self.col_idx[k]];
            }
        }
        out
    }

    /// Adds `delta[i]` to each diagonal entry, inserting missing diagonals.
    pub fn add_to_diag(&self, delta: &[f64]) -> Result<CsrMatrix> {
        if !self.is_square() || delta.len() != self.n_rows {
            return Err(Error::DimensionMismatch("add_to_diag on non-conforming matrix".into()));
        }
        let trip: Vec<(usize, usize, f64)> =
            (0..self.n_rows).map(|i| (i, i, delta[i])).collect();
        let d = CsrMatrix::from_triplets(self.n_rows, self.n_cols, &trip)?;
        self.add(&d)
    }

    /// Diagonal as a vector; absent entries read as zero. Requires square.
    pub fn diag(&self) -> DenseVector {
        assert!(self.is_square(), "diag of non-square matrix");
        let mut d = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            d[i] = self.get(i, i);
        }
        DenseVector::from_raw(d)
    }

    /// Signed row sums, accumulated left-to-right.
    pub fn row_sums(&self) -> DenseVector {
        let mut s = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k];
            }
            s[i] = acc;
        }
        DenseVector::from_raw(s)
    }

    /// Canonical form without explicitly stored zeros.
    pub fn drop_explicit_zeros(&self) -> CsrMatrix {
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[k] != 0.0 {
                    col_idx.push(self.col_idx[k]);
                    values.push(self.values[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for v in &self.values {
            acc += v * v;
        }
        acc.sqrt()
    }
}

/// Galerkin-style triple product R * A * P.
pub fn triple_product(r: &CsrMatrix, a: &CsrMatrix, p: &CsrMatrix) -> Result<CsrMatrix> {
    r.matmul(a)?.matmul(p)
}

/// Elementwise product of two vectors.
pub fn hadamard(u: &DenseVector, v: &DenseVector) -> Result<DenseVector> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch(format!(
            "hadamard: lengths {} and {}",
            u.len(),
            v.len()
        )));
    }
    let w = u.iter().zip(v.iter()).map(|(a, b)| a * b).collect();
    Ok(DenseVector::from_raw(w))
}

#[cfg(test)]
mod tests;
