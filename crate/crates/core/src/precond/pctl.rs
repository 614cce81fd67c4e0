//! Physical-variable based coarsening two-level preconditioner.
//!
//! The electron variable forms the coarse level.  Interpolation blocks are
//! restricted to diagonals whose entries solve `A_g p_g = -D_gE 1` (and the
//! ion analogue) so that constants are interpolated exactly; the coarse
//! operator is the Galerkin product with that diagonal-block interpolation,
//! which keeps the sparsity of the electron block whenever the diagonal
//! blocks share a pattern.

use super::counters::OperationCounters;
use super::inner::InnerSolver;
use super::{PrecondConfig, SubRhs, SubSol};
use crate::block::{weak_coupling_factor, BlockSystem, VarId};
use crate::error::Result;
use crate::sparse::{CsrMatrix, DenseVector};

struct PctlGroup {
    a: CsrMatrix,
    d_ge: DenseVector,
    d_eg: DenseVector,
    p: DenseVector,
    solver: InnerSolver,
}

struct PctlIon {
    a: CsrMatrix,
    d_ei: DenseVector,
    d_ie: DenseVector,
    p: DenseVector,
    solver: InnerSolver,
}

pub(crate) struct PctlState {
    n: usize,
    groups: Vec<PctlGroup>,
    e_matrix: CsrMatrix,
    e_solver: InnerSolver,
    ion: Option<PctlIon>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) coarse_operator: Option<CsrMatrix>,
    coarse_solver: Option<InnerSolver>,
}

impl PctlState {
    /// (group interpolation vectors, ion interpolation vector)
    #[cfg(test)]
    pub(crate) fn interpolation_vectors(&self) -> (Vec<&DenseVector>, Option<&DenseVector>) {
        (
            self.groups.iter().map(|g| &g.p).collect(),
            self.ion.as_ref().map(|i| &i.p),
        )
    }

    /// `active_groups` lists the 0-based group indices kept in this
    /// (possibly reduced) preconditioner; `skip_coarse` drops the
    /// coarse-grid correction, which is legitimate only when every
    /// remaining electron-row coupling is weak.
    pub(crate) fn build(
        s: &BlockSystem,
        active_groups: &[usize],
        ion_active: bool,
        skip_coarse: bool,
        cfg: &PrecondConfig,
        setup: &mut OperationCounters,
    ) -> Result<Self> {
        let n = s.block_size();
        let theta_wd = cfg.indicators.theta_wd;

        // interpolation entries p_alpha = -A_alpha^-1 D_alphaE 1, solved by
        // V-cycles to the prescribed tolerance
        let mut groups = Vec::with_capacity(active_groups.len());
        for &gi in active_groups {
            let a = s.block(VarId::Group(gi)).clone();
            let d_ge = s.d_ge(gi).clone();
            let d_eg = s.d_eg(gi).clone();
            let neg: Vec<f64> = d_ge.iter().map(|v| -v).collect();
            let p_solver = interpolation_solver(&format!("p_{}", gi + 1), &a, cfg)?;
            let p = DenseVector::new(p_solver.solve(&neg, setup)?)?;
            let solver = apply_solver(
                &format!("A_{}", gi + 1),
                &a,
                theta_wd,
                cfg.sweeps_radiation,
                cfg,
            )?;
            groups.push(PctlGroup {
                a,
                d_ge,
                d_eg,
                p,
                solver,
            });
        }
        let ion = if ion_active {
            let a = s.block(VarId::Ion).clone();
            let d_ei = s.d_ei().clone();
            let d_ie = s.d_ie().clone();
            let neg: Vec<f64> = d_ie.iter().map(|v| -v).collect();
            let p_solver = interpolation_solver("p_I", &a, cfg)?;
            let p = DenseVector::new(p_solver.solve(&neg, setup)?)?;
            let solver = apply_solver("A_I", &a, theta_wd, cfg.sweeps_ei, cfg)?;
            Some(PctlIon {
                a,
                d_ei,
                d_ie,
                p,
                solver,
            })
        } else {
            None
        };

        let e_matrix = s.block(VarId::Electron).clone();
        let e_solver = apply_solver("A_E", &e_matrix, theta_wd, cfg.sweeps_ei, cfg)?;

        let (coarse_operator, coarse_solver) = if skip_coarse {
            (None, None)
        } else {
            // A_c = sum_g P_g^T A_g P_g + A_E + P_I^T A_I P_I
            //     + sum_g (D_Eg P_g + P_g^T D_gE) + D_EI P_I + P_I^T D_IE
            let mut a_c = e_matrix.clone();
            let mut diag_corr = vec![0.0; n];
            for grp in &groups {
                let scaled = grp.a.scale_outer(&grp.p, &grp.p);
                setup.matrix_update += 1;
                a_c = a_c.add(&scaled)?;
                for i in 0..n {
                    diag_corr[i] += grp.d_eg[i] * grp.p[i] + grp.p[i] * grp.d_ge[i];
                }
            }
            if let Some(ion) = &ion {
                let scaled = ion.a.scale_outer(&ion.p, &ion.p);
                setup.matrix_update += 1;
                a_c = a_c.add(&scaled)?;
                for i in 0..n {
                    diag_corr[i] += ion.d_ei[i] * ion.p[i] + ion.p[i] * ion.d_ie[i];
                }
            }
            a_c = a_c.add_to_diag(&diag_corr)?;
            setup.matrix_update += 1;
            let solver = apply_solver("A_c", &a_c, theta_wd, cfg.sweeps_ei, cfg)?;
            (Some(a_c), Some(solver))
        };

        Ok(PctlState {
            n,
            groups,
            e_matrix,
            e_solver,
            ion,
            coarse_operator,
            coarse_solver,
        })
    }

    /// True when every remaining electron-row coupling is weak, the one
    /// case in which the coarse-grid correction may be skipped.
    pub(crate) fn may_skip_coarse(
        s: &BlockSystem,
        active_groups: &[usize],
        ion_active: bool,
        theta_wc: f64,
        sigma_wc: f64,
    ) -> bool {
        let a_e = s.block(VarId::Electron);
        for &gi in active_groups {
            if weak_coupling_factor(s.d_eg(gi), a_e, theta_wc) <= sigma_wc {
                return false;
            }
        }
        if ion_active && weak_coupling_factor(s.d_ei(), a_e, theta_wc) <= sigma_wc {
            return false;
        }
        true
    }

    pub(crate) fn apply(&self, b: &SubRhs, c: &mut OperationCounters) -> Result<SubSol> {
        let n = self.n;

        // step 1: block relaxation, electron first
        let w_e = self.e_solver.solve(b.e, c)?;
        let mut w_groups = Vec::with_capacity(self.groups.len());
        for (grp, bg) in self.groups.iter().zip(b.groups.iter()) {
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] = bg[i] - grp.d_ge[i] * w_e[i];
            }
            c.hadamard += 1;
            c.vector_update += 1;
            w_groups.push(grp.solver.solve(&rhs, c)?);
        }
        let mut w_ion = match (&self.ion, b.ion) {
            (Some(ion), Some(bi)) => {
                let mut rhs = vec![0.0; n];
                for i in 0..n {
                    rhs[i] = bi[i] - ion.d_ie[i] * w_e[i];
                }
                c.hadamard += 1;
                c.vector_update += 1;
                Some(ion.solver.solve(&rhs, c)?)
            }
            (None, None) => None,
            _ => unreachable!("ion presence of state and rhs always agree"),
        };
        let mut w_e = w_e;

        // steps 2 and 3: coarse-grid correction through P^T
        if let Some(coarse) = &self.coarse_solver {
            let mut rhs_c = vec![0.0; n];
            {
                // electron residual row feeds the identity part of P^T
                let mut ax = vec![0.0; n];
                self.e_matrix.spmv_into(&w_e, &mut ax);
                c.matvec += 1;
                for i in 0..n {
                    rhs_c[i] = b.e[i] - ax[i];
                }
                for (grp, wg) in self.groups.iter().zip(w_groups.iter()) {
                    for i in 0..n {
                        rhs_c[i] -= grp.d_eg[i] * wg[i];
                    }
                    c.hadamard += 1;
                    c.vector_update += 1;
                }
                if let (Some(ion), Some(wi)) = (&self.ion, w_ion.as_ref()) {
                    for i in 0..n {
                        rhs_c[i] -= ion.d_ei[i] * wi[i];
                    }
                    c.hadamard += 1;
                    c.vector_update += 1;
                }
            }
            let mut ax = vec![0.0; n];
            for ((grp, wg), bg) in self.groups.iter().zip(w_groups.iter()).zip(b.groups.iter()) {
                grp.a.spmv_into(wg, &mut ax);
                c.matvec += 1;
                for i in 0..n {
                    let r = bg[i] - ax[i] - grp.d_ge[i] * w_e[i];
                    rhs_c[i] += grp.p[i] * r;
                }
                c.hadamard += 2;
                c.vector_update += 2;
            }
            if let (Some(ion), Some(wi)) = (&self.ion, w_ion.as_ref()) {
                ion.a.spmv_into(wi, &mut ax);
                c.matvec += 1;
                let bi = b.ion.unwrap();
                for i in 0..n {
                    let r = bi[i] - ax[i] - ion.d_ie[i] * w_e[i];
                    rhs_c[i] += ion.p[i] * r;
                }
                c.hadamard += 2;
                c.vector_update += 2;
            }

            let w_c = coarse.solve(&rhs_c, c)?;
            for (grp, wg) in self.groups.iter().zip(w_groups.iter_mut()) {
                for i in 0..n {
                    wg[i] += grp.p[i] * w_c[i];
                }
            }
            c.hadamard += self.groups.len() as u64;
            c.vector_update += self.groups.len() as u64 + 1;
            for i in 0..n {
                w_e[i] += w_c[i];
            }
            if let (Some(ion), Some(wi)) = (&self.ion, w_ion.as_mut()) {
                for i in 0..n {
                    wi[i] += ion.p[i] * w_c[i];
                }
                c.hadamard += 1;
                c.vector_update += 1;
            }
        }

        Ok(SubSol {
            groups: w_groups,
            e: w_e,
            ion: w_ion,
        })
    }
}

fn interpolation_solver(label: &str, a: &CsrMatrix, cfg: &PrecondConfig) -> Result<InnerSolver> {
    if cfg.exact_dense {
        InnerSolver::direct(label, a)
    } else {
        InnerSolver::vcycle_to_tol(label, a, cfg.inner_tol, cfg.inner_max_cycles, &cfg.amg)
    }
}

fn apply_solver(
    label: &str,
    a: &CsrMatrix,
    theta_wd: f64,
    sweeps: usize,
    cfg: &PrecondConfig,
) -> Result<InnerSolver> {
    if cfg.exact_dense {
        InnerSolver::direct(label, a)
    } else {
        InnerSolver::dispatch(label, a, theta_wd, sweeps, &cfg.amg)
    }
}
