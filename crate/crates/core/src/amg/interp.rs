//! Classical two-pass interpolation.

use super::split::CfType;
use super::strength::StrengthGraph;
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

/// Builds the fine-by-coarse interpolation matrix.
///
/// C rows are unit rows at their own coarse index.  F rows use the classical
/// weights: strong F neighbors are redistributed through the row's coarse
/// interpolatory set, weak neighbors are collapsed into the diagonal.  An F
/// row with no strong connections at all interpolates zero and is handled by
/// smoothing alone.
pub fn build_interpolation(
    a: &CsrMatrix,
    s: &StrengthGraph,
    cf: &[CfType],
) -> Result<CsrMatrix> {
    let n = a.n_rows();
    assert_eq!(cf.len(), n);

    let mut coarse_index = vec![usize::MAX; n];
    let mut n_coarse = 0usize;
    for i in 0..n {
        if cf[i] == CfType::Coarse {
            coarse_index[i] = n_coarse;
            n_coarse += 1;
        }
    }

    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    row_ptr.push(0);

    for i in 0..n {
        if cf[i] == CfType::Coarse {
            col_idx.push(coarse_index[i]);
            values.push(1.0);
            row_ptr.push(col_idx.len());
            continue;
        }
        let strong = s.neighbors(i);
        if strong.is_empty() {
            row_ptr.push(col_idx.len());
            continue;
        }

        let c_i: Vec<usize> = strong
            .iter()
            .copied()
            .filter(|&j| cf[j] == CfType::Coarse)
            .collect();
        let strong_f: Vec<usize> = strong
            .iter()
            .copied()
            .filter(|&j| cf[j] == CfType::Fine)
            .collect();
        if c_i.is_empty() {
            return Err(Error::InvalidMatrix(format!(
                "row {i}: F point with strong neighbors but no coarse interpolatory set"
            )));
        }

        let mut diag = 0.0;
        let mut weak_sum = 0.0;
        for (j, v) in a.row(i) {
            if j == i {
                diag = v;
            } else if strong.binary_search(&j).is_err() {
                weak_sum += v;
            }
        }
        let denom = diag + weak_sum;
        if denom == 0.0 {
            return Err(Error::InvalidMatrix(format!(
                "row {i}: zero interpolation denominator"
            )));
        }

        // numerator per coarse neighbor: a_ij plus the share of each strong
        // F neighbor m redistributed by a_mj / sum_{k in C_i} a_mk
        let mut numer: Vec<f64> = c_i.iter().map(|&j| a.get(i, j)).collect();
        for &m in &strong_f {
            let mut m_sum = 0.0;
            for &k in &c_i {
                m_sum += a.get(m, k);
            }
            if m_sum == 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "row {i}: strong F neighbor {m} shares no coarse point"
                )));
            }
            let a_im = a.get(i, m);
            for (t, &j) in c_i.iter().enumerate() {
                let a_mj = a.get(m, j);
                if a_mj != 0.0 {
                    numer[t] += a_im * a_mj / m_sum;
                }
            }
        }

        // coarse indices of C_i are ascending because strong is ascending
        for (t, &j) in c_i.iter().enumerate() {
            col_idx.push(coarse_index[j]);
            values.push(-numer[t] / denom);
        }
        row_ptr.push(col_idx.len());
    }

    CsrMatrix::new(n, n_coarse, row_ptr, col_idx, values)
}
