//! Strength-of-connection graph for classical coarsening.

use crate::sparse::CsrMatrix;

/// Sparse boolean graph over the rows of a square matrix; edge i -> j means
/// "i strongly depends on j".
#[derive(Debug, Clone)]
pub struct StrengthGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl StrengthGraph {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_idx[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.neighbors(i).binary_search(&j).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.col_idx.is_empty()
    }

    /// Transposed adjacency: for each point, the points that depend on it.
    pub fn transpose_lists(&self) -> Vec<Vec<usize>> {
        let mut t = vec![Vec::new(); self.n];
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                t[j].push(i);
            }
        }
        t
    }
}

/// Marks i -> j strong when -a_ij >= theta * max_{k != i}(-a_ik).
/// Rows whose largest negated off-diagonal is not positive get no edges.
pub fn strength_graph(a: &CsrMatrix, theta: f64) -> StrengthGraph {
    assert!(a.is_square(), "strength graph of non-square matrix");
    let n = a.n_rows();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    row_ptr.push(0);
    for i in 0..n {
        let mut max_neg = 0.0f64;
        for (j, v) in a.row(i) {
            if j != i && -v > max_neg {
                max_neg = -v;
            }
        }
        if max_neg > 0.0 {
            let cut = theta * max_neg;
            for (j, v) in a.row(i) {
                if j != i && -v >= cut {
                    col_idx.push(j);
                }
            }
        }
        row_ptr.push(col_idx.len());
    }
    StrengthGraph { n, row_ptr, col_idx }
}
