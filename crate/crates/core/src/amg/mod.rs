//! Serial classical algebraic multigrid.
//!
//! Setup coarsens recursively with Ruge-Stuben splitting and classical
//! interpolation; the solve phase runs V(1,1) cycles with Gauss-Seidel
//! smoothing in CF ordering on the way down and the reverse on the way up.
//! The hierarchy is immutable after setup and is used both as a monolithic
//! preconditioner and as the inner solver of the block preconditioners.

mod interp;
mod split;
mod strength;

pub use interp::build_interpolation;
pub use split::{cf_split, coarse_count, CfType};
pub use strength::{strength_graph, StrengthGraph};

use crate::error::{Error, Result};
use crate::sparse::{norm2, sub_into, CsrMatrix, DenseLuFactor, DenseVector};

#[derive(Debug, Clone)]
pub struct AmgParams {
    pub strength_threshold: f64,
    pub max_coarsest_size: usize,
    pub n_presmooth: usize,
    pub n_postsmooth: usize,
    pub max_levels: usize,
}

impl Default for AmgParams {
    fn default() -> Self {
        AmgParams {
            strength_threshold: 0.25,
            max_coarsest_size: 100,
            n_presmooth: 1,
            n_postsmooth: 1,
            max_levels: 25,
        }
    }
}

impl AmgParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.strength_threshold > 0.0 && self.strength_threshold < 1.0) {
            return Err(Error::InvalidParam(format!(
                "strength threshold {} outside (0,1)",
                self.strength_threshold
            )));
        }
        if self.max_coarsest_size < 1 {
            return Err(Error::InvalidParam("max_coarsest_size must be >= 1".into()));
        }
        Ok(())
    }
}

/// One non-coarsest level of the hierarchy.
#[derive(Debug, Clone)]
pub struct AmgLevel {
    pub operator: CsrMatrix,
    /// fine-by-coarse interpolation
    pub interpolation: CsrMatrix,
    /// transpose of the interpolation, stored to keep cycles allocation-free
    pub restriction: CsrMatrix,
    pub cf_marker: Vec<CfType>,
}

#[derive(Debug, Clone)]
pub struct AmgHierarchy {
    levels: Vec<AmgLevel>,
    coarsest_op: CsrMatrix,
    coarsest_lu: DenseLuFactor,
    params: AmgParams,
    operator_complexity: f64,
}

/// Coarsening stalls when it retains at least this fraction of the points.
const STALL_RATIO: f64 = 0.9;

pub fn amg_setup(a: &CsrMatrix, params: &AmgParams) -> Result<AmgHierarchy> {
    params.validate()?;
    if !a.is_square() {
        return Err(Error::InvalidMatrix(format!(
            "amg setup on {}x{} matrix",
            a.n_rows(),
            a.n_cols()
        )));
    }
    for (i, d) in a.diag().iter().enumerate() {
        if *d <= 0.0 {
            return Err(Error::InvalidMatrix(format!(
                "amg setup: nonpositive diagonal {d} at row {i}"
            )));
        }
    }

    let fine_nnz = a.nnz() as f64;
    let mut total_nnz = 0.0;
    let mut levels = Vec::new();
    let mut current = a.clone();

    while current.n_rows() > params.max_coarsest_size && levels.len() + 1 < params.max_levels {
        let s = strength_graph(&current, params.strength_threshold);
        let cf = cf_split(&s);
        let n_c = coarse_count(&cf);
        if n_c as f64 >= STALL_RATIO * current.n_rows() as f64 {
            // coarsening stalled (e.g. near-diagonal matrix): accept the
            // current level as coarsest and factor it densely
            break;
        }
        let p = build_interpolation(&current, &s, &cf)?;
        let r = p.transpose();
        let coarse = crate::sparse::triple_product(&r, &current, &p)?;
        total_nnz += current.nnz() as f64;
        levels.push(AmgLevel {
            operator: current,
            interpolation: p,
            restriction: r,
            cf_marker: cf,
        });
        current = coarse;
    }

    total_nnz += current.nnz() as f64;
    let coarsest_lu = DenseLuFactor::factor_csr(&current)?;
    Ok(AmgHierarchy {
        levels,
        coarsest_op: current,
        coarsest_lu,
        params: params.clone(),
        operator_complexity: total_nnz / fine_nnz,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Down,
    Up,
}

/// Gauss-Seidel sweep in CF ordering: the down sweep relaxes all coarse
/// points in ascending index then all fine points; the up sweep reverses
/// that traversal.
pub fn hybrid_sym_gs_sweep(
    a: &CsrMatrix,
    x: &mut [f64],
    b: &[f64],
    direction: SweepDirection,
    cf: &[CfType],
) -> Result<()> {
    let n = a.n_rows();
    assert_eq!(x.len(), n);
    assert_eq!(b.len(), n);
    assert_eq!(cf.len(), n);

    let relax = |i: usize, x: &mut [f64]| -> Result<()> {
        let mut acc = b[i];
        let mut diag = 0.0;
        for (j, v) in a.row(i) {
            if j == i {
                diag = v;
            } else {
                acc -= v * x[j];
            }
        }
        if diag == 0.0 {
            return Err(Error::InvalidMatrix(format!(
                "gauss-seidel: zero diagonal at row {i}"
            )));
        }
        x[i] = acc / diag;
        Ok(())
    };

    let sweep_class = |class: CfType, reverse: bool, x: &mut [f64]| -> Result<()> {
        if reverse {
            for (i, &c) in cf.iter().enumerate().rev() {
                if c == class {
                    relax(i, x)?;
                }
            }
        } else {
            for (i, &c) in cf.iter().enumerate() {
                if c == class {
                    relax(i, x)?;
                }
            }
        }
        Ok(())
    };
    match direction {
        SweepDirection::Down => {
            sweep_class(CfType::Coarse, false, x)?;
            sweep_class(CfType::Fine, false, x)?;
        }
        SweepDirection::Up => {
            sweep_class(CfType::Fine, true, x)?;
            sweep_class(CfType::Coarse, true, x)?;
        }
    }
    Ok(())
}

impl AmgHierarchy {
    pub fn finest_size(&self) -> usize {
        self.finest_operator().n_rows()
    }

    pub fn finest_operator(&self) -> &CsrMatrix {
        match self.levels.first() {
            Some(l) => &l.operator,
            None => &self.coarsest_op,
        }
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn levels(&self) -> &[AmgLevel] {
        &self.levels
    }

    pub fn coarsest_operator(&self) -> &CsrMatrix {
        &self.coarsest_op
    }

    pub fn params(&self) -> &AmgParams {
        &self.params
    }

    /// Sum of per-level nnz divided by the finest nnz.
    pub fn operator_complexity(&self) -> f64 {
        self.operator_complexity
    }

    /// One V(n_pre, n_post) cycle starting from `x0`.
    pub fn vcycle(&self, b: &DenseVector, x0: &DenseVector) -> Result<DenseVector> {
        let n = self.finest_size();
        if b.len() != n || x0.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "vcycle: hierarchy size {n}, b {}, x0 {}",
                b.len(),
                x0.len()
            )));
        }
        let mut x = x0.clone().into_vec();
        self.cycle_level(0, b.as_slice(), &mut x)?;
        DenseVector::new(x)
            .map_err(|_| Error::InvalidMatrix("vcycle produced non-finite iterate".into()))
    }

    fn cycle_level(&self, level: usize, b: &[f64], x: &mut [f64]) -> Result<()> {
        if level == self.levels.len() {
            let sol = self.coarsest_lu.solve_slice(b)?;
            x.copy_from_slice(&sol);
            return Ok(());
        }
        let lvl = &self.levels[level];
        let a = &lvl.operator;
        for _ in 0..self.params.n_presmooth {
            hybrid_sym_gs_sweep(a, x, b, SweepDirection::Down, &lvl.cf_marker)?;
        }
        let mut ax = vec![0.0; a.n_rows()];
        a.spmv_into(x, &mut ax);
        let mut r = vec![0.0; a.n_rows()];
        sub_into(b, &ax, &mut r);
        let mut rc = vec![0.0; lvl.restriction.n_rows()];
        lvl.restriction.spmv_into(&r, &mut rc);
        let mut ec = vec![0.0; rc.len()];
        self.cycle_level(level + 1, &rc, &mut ec)?;
        let mut ef = vec![0.0; a.n_rows()];
        lvl.interpolation.spmv_into(&ec, &mut ef);
        for i in 0..x.len() {
            x[i] += ef[i];
        }
        for _ in 0..self.params.n_postsmooth {
            hybrid_sym_gs_sweep(a, x, b, SweepDirection::Up, &lvl.cf_marker)?;
        }
        Ok(())
    }

    /// V-cycle iteration from a zero initial guess until the residual drops
    /// below `tol * ||b||` or `max_cycles` is reached; returns the iterate
    /// and the number of cycles used.
    pub fn solve_to_tol(
        &self,
        b: &DenseVector,
        tol: f64,
        max_cycles: usize,
    ) -> Result<(DenseVector, usize)> {
        let n = self.finest_size();
        if b.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "solve_to_tol: hierarchy size {n}, b {}",
                b.len()
            )));
        }
        let bnorm = b.norm2();
        let mut x = DenseVector::zeros(n);
        if bnorm == 0.0 {
            return Ok((x, 0));
        }
        let a = self.finest_operator();
        let mut cycles = 0;
        let mut ax = vec![0.0; n];
        let mut r = vec![0.0; n];
        loop {
            a.spmv_into(&x, &mut ax);
            sub_into(b, &ax, &mut r);
            if norm2(&r) <= tol * bnorm || cycles >= max_cycles {
                return Ok((x, cycles));
            }
            x = self.vcycle(b, &x)?;
            cycles += 1;
        }
    }

    /// Plain-text per-level summary for verbose output.
    pub fn summary(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "level     rows      nnz");
        for (i, l) in self.levels.iter().enumerate() {
            let _ = writeln!(out, "{:>5} {:>8} {:>8}", i, l.operator.n_rows(), l.operator.nnz());
        }
        let _ = writeln!(
            out,
            "{:>5} {:>8} {:>8}  (coarsest, dense LU)",
            self.levels.len(),
            self.coarsest_op.n_rows(),
            self.coarsest_op.nnz()
        );
        let _ = writeln!(out, "operator complexity {:.3}", self.operator_complexity);
        out
    }
}

#[cfg(test)]
mod tests;
