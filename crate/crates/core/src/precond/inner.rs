//! Approximate block inverses.
//!
//! Four approximation options back the operation `w = A^-1 b`:
//! a fixed number of Jacobi sweeps, a fixed number of AMG V-cycles,
//! V-cycles to a prescribed tolerance, and a coupled fixed-point iteration
//! for Schur complements whose matrix is never formed.  Exact dense LU is
//! available for the test oracles.  The fast-path dispatcher picks Jacobi
//! when the weak diagonal dominance factor is zero and V-cycles otherwise.

use super::counters::OperationCounters;
use crate::amg::{amg_setup, AmgHierarchy, AmgParams};
use crate::block::weak_diag_dominance_factor;
use crate::error::{Error, Result};
use crate::sparse::{DenseLuFactor, DenseMatrix, DenseVector};
use crate::sparse::CsrMatrix;

#[derive(Debug)]
enum InnerKind {
    /// option #1
    Jacobi {
        matrix: CsrMatrix,
        inv_diag: Vec<f64>,
        sweeps: usize,
    },
    /// option #2
    VcycleFixed {
        hierarchy: AmgHierarchy,
        sweeps: usize,
    },
    /// option #3
    VcycleToTol {
        hierarchy: AmgHierarchy,
        tol: f64,
        max_cycles: usize,
    },
    /// option #4: w <- primary^-1 (q + d_po o other^-1 (d_op o w))
    FixedPoint {
        primary: Box<InnerSolver>,
        other: Box<InnerSolver>,
        d_po: DenseVector,
        d_op: DenseVector,
        sweeps: usize,
    },
    /// exact dense solve for oracles and small systems
    Direct { lu: DenseLuFactor },
}

/// A configured approximate inverse for one labeled block.
#[derive(Debug)]
pub struct InnerSolver {
    label: String,
    n: usize,
    kind: InnerKind,
}

impl InnerSolver {
    pub fn jacobi(label: &str, matrix: CsrMatrix, sweeps: usize) -> Result<Self> {
        if sweeps == 0 {
            return Err(Error::InvalidParam("jacobi sweeps must be >= 1".into()));
        }
        let n = matrix.n_rows();
        let diag = matrix.diag();
        let mut inv_diag = vec![0.0; n];
        for (i, d) in diag.iter().enumerate() {
            if *d == 0.0 {
                return Err(Error::InnerSolve {
                    block: label.to_string(),
                    reason: format!("zero diagonal at row {i} for Jacobi"),
                });
            }
            inv_diag[i] = 1.0 / d;
        }
        Ok(InnerSolver {
            label: label.to_string(),
            n,
            kind: InnerKind::Jacobi {
                matrix,
                inv_diag,
                sweeps,
            },
        })
    }

    pub fn vcycle_fixed(
        label: &str,
        matrix: &CsrMatrix,
        sweeps: usize,
        amg: &AmgParams,
    ) -> Result<Self> {
        if sweeps == 0 {
            return Err(Error::InvalidParam("cycle count must be >= 1".into()));
        }
        let hierarchy = amg_setup(matrix, amg).map_err(|e| Error::InnerSolve {
            block: label.to_string(),
            reason: e.to_string(),
        })?;
        Ok(InnerSolver {
            label: label.to_string(),
            n: matrix.n_rows(),
            kind: InnerKind::VcycleFixed { hierarchy, sweeps },
        })
    }

    pub fn vcycle_to_tol(
        label: &str,
        matrix: &CsrMatrix,
        tol: f64,
        max_cycles: usize,
        amg: &AmgParams,
    ) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParam("inner tolerance must be > 0".into()));
        }
        let hierarchy = amg_setup(matrix, amg).map_err(|e| Error::InnerSolve {
            block: label.to_string(),
            reason: e.to_string(),
        })?;
        Ok(InnerSolver {
            label: label.to_string(),
            n: matrix.n_rows(),
            kind: InnerKind::VcycleToTol {
                hierarchy,
                tol,
                max_cycles,
            },
        })
    }

    pub fn direct(label: &str, matrix: &CsrMatrix) -> Result<Self> {
        let lu = DenseLuFactor::factor_csr(matrix).map_err(|e| Error::InnerSolve {
            block: label.to_string(),
            reason: e.to_string(),
        })?;
        Ok(InnerSolver {
            label: label.to_string(),
            n: matrix.n_rows(),
            kind: InnerKind::Direct { lu },
        })
    }

    pub fn direct_dense(label: &str, matrix: &DenseMatrix) -> Result<Self> {
        let lu = DenseLuFactor::factor(matrix).map_err(|e| Error::InnerSolve {
            block: label.to_string(),
            reason: e.to_string(),
        })?;
        Ok(InnerSolver {
            label: label.to_string(),
            n: matrix.n_rows(),
            kind: InnerKind::Direct { lu },
        })
    }

    /// Fixed-point approximation of `(primary - d_po o other^-1 o d_op)^-1`
    /// from a zero initial guess with a fixed number of steps.
    pub fn fixed_point(
        label: &str,
        primary: InnerSolver,
        other: InnerSolver,
        d_po: DenseVector,
        d_op: DenseVector,
        sweeps: usize,
    ) -> Result<Self> {
        if sweeps == 0 {
            return Err(Error::InvalidParam("fixed-point sweeps must be >= 1".into()));
        }
        let n = primary.n;
        if other.n != n || d_po.len() != n || d_op.len() != n {
            return Err(Error::DimensionMismatch(
                "fixed-point solver blocks must share one size".into(),
            ));
        }
        Ok(InnerSolver {
            label: label.to_string(),
            n,
            kind: InnerKind::FixedPoint {
                primary: Box::new(primary),
                other: Box::new(other),
                d_po,
                d_op,
                sweeps,
            },
        })
    }

    /// Fast-path dispatcher: Jacobi when the block is diagonally dominant
    /// enough (weak dominance factor zero at `theta_wd`), AMG V-cycles
    /// otherwise.  The factor is computed once here, at setup.
    pub fn dispatch(
        label: &str,
        matrix: &CsrMatrix,
        theta_wd: f64,
        sweeps: usize,
        amg: &AmgParams,
    ) -> Result<Self> {
        let gamma = weak_diag_dominance_factor(matrix, theta_wd).map_err(|e| {
            Error::InnerSolve {
                block: label.to_string(),
                reason: e.to_string(),
            }
        })?;
        if gamma == 0.0 {
            InnerSolver::jacobi(label, matrix.clone(), sweeps)
        } else {
            InnerSolver::vcycle_fixed(label, matrix, sweeps, amg)
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn size(&self) -> usize {
        self.n
    }

    /// Which approximation backs this solver ("#1".."#4" or "direct").
    pub fn option_name(&self) -> &'static str {
        match &self.kind {
            InnerKind::Jacobi { .. } => "#1",
            InnerKind::VcycleFixed { .. } => "#2",
            InnerKind::VcycleToTol { .. } => "#3",
            InnerKind::FixedPoint { .. } => "#4",
            InnerKind::Direct { .. } => "direct",
        }
    }

    /// One matrix-inverse operation; inner work lands under this block's
    /// label.
    pub fn solve(&self, rhs: &[f64], counters: &mut OperationCounters) -> Result<Vec<f64>> {
        counters.matrix_inverse += 1;
        self.solve_nested(rhs, counters)
    }

    fn solve_nested(&self, rhs: &[f64], counters: &mut OperationCounters) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "inner solve {} of size {} with rhs length {}",
                self.label,
                self.n,
                rhs.len()
            )));
        }
        match &self.kind {
            InnerKind::Jacobi {
                matrix,
                inv_diag,
                sweeps,
            } => {
                let n = self.n;
                let mut x = vec![0.0; n];
                let mut ax = vec![0.0; n];
                for _ in 0..*sweeps {
                    matrix.spmv_into(&x, &mut ax);
                    for i in 0..n {
                        x[i] += inv_diag[i] * (rhs[i] - ax[i]);
                    }
                }
                counters.add_cycles(&self.label, *sweeps as u64);
                Ok(x)
            }
            InnerKind::VcycleFixed { hierarchy, sweeps } => {
                let b = DenseVector::new(rhs.to_vec()).map_err(|e| Error::InnerSolve {
                    block: self.label.clone(),
                    reason: e.to_string(),
                })?;
                let mut x = DenseVector::zeros(self.n);
                for _ in 0..*sweeps {
                    x = hierarchy.vcycle(&b, &x).map_err(|e| Error::InnerSolve {
                        block: self.label.clone(),
                        reason: e.to_string(),
                    })?;
                }
                counters.add_cycles(&self.label, *sweeps as u64);
                Ok(x.into_vec())
            }
            InnerKind::VcycleToTol {
                hierarchy,
                tol,
                max_cycles,
            } => {
                let b = DenseVector::new(rhs.to_vec()).map_err(|e| Error::InnerSolve {
                    block: self.label.clone(),
                    reason: e.to_string(),
                })?;
                let (x, used) =
                    hierarchy
                        .solve_to_tol(&b, *tol, *max_cycles)
                        .map_err(|e| Error::InnerSolve {
                            block: self.label.clone(),
                            reason: e.to_string(),
                        })?;
                counters.add_cycles(&self.label, used as u64);
                Ok(x.into_vec())
            }
            InnerKind::FixedPoint {
                primary,
                other,
                d_po,
                d_op,
                sweeps,
            } => {
                let n = self.n;
                let mut w = vec![0.0; n];
                let mut t = vec![0.0; n];
                for _ in 0..*sweeps {
                    for i in 0..n {
                        t[i] = d_op[i] * w[i];
                    }
                    let u = other.solve_nested(&t, counters)?;
                    for i in 0..n {
                        t[i] = rhs[i] + d_po[i] * u[i];
                    }
                    w = primary.solve_nested(&t, counters)?;
                }
                counters.add_cycles(&self.label, *sweeps as u64);
                Ok(w)
            }
            InnerKind::Direct { lu } => lu.solve_slice(rhs).map_err(|e| Error::InnerSolve {
                block: self.label.clone(),
                reason: e.to_string(),
            }),
        }
    }
}
