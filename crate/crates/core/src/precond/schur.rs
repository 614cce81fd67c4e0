//! Two block Schur complement preconditioners.
//!
//! Schur1 eliminates the ion block first and decouples the groups through
//! the electron Schur complement `C_E = A_E - D_EI A_I^-1 D_IE`; Schur2
//! splits off the group rows through `A_E` directly and closes with the ion
//! Schur complement `S_I = A_I - D_IE A_E^-1 D_EI`.  In the default
//! configuration the never-formed complements are replaced by explicit
//! diagonal-update approximations (`diag(.)^-1` in place of the full
//! inverse), each solved by AMG V-cycles to the inner tolerance.  The exact
//! dense forms remain available for the oracle tests, and the ion/electron
//! complement can instead be applied through the coupled fixed-point
//! iteration.

use super::counters::OperationCounters;
use super::inner::InnerSolver;
use super::{PrecondConfig, SubRhs, SubSol};
use crate::block::{BlockSystem, VarId};
use crate::error::Result;
use crate::sparse::{CsrMatrix, DenseMatrix, DenseVector};

struct SchurGroup {
    d_ge: DenseVector,
    d_eg: DenseVector,
    solver: InnerSolver,
}

struct SchurIon {
    d_ei: DenseVector,
    d_ie: DenseVector,
    solver: InnerSolver,
}

/// Elimination order: ion, electron complement, groups, back-substitution.
pub(crate) struct Schur1State {
    n: usize,
    groups: Vec<SchurGroup>,
    e_solver: InnerSolver,
    ion: Option<SchurIon>,
    /// explicit diagonal-update approximation of C_E (None in exact mode)
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) c_e_hat: Option<CsrMatrix>,
}

/// Elimination order: electron, groups and ion complement, correction.
pub(crate) struct Schur2State {
    n: usize,
    groups: Vec<SchurGroup>,
    e_solver: InnerSolver,
    ion: Option<SchurIon>,
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) s_hats: Vec<CsrMatrix>,
}

/// `hat = a - diag(u o v / diag(base))`, the diagonal-update approximation
/// shared by all four explicit Schur matrices; counted as a vector update.
fn hat_matrix(
    a: &CsrMatrix,
    u: &DenseVector,
    v: &DenseVector,
    base_diag: &DenseVector,
    setup: &mut OperationCounters,
) -> Result<CsrMatrix> {
    let n = a.n_rows();
    let mut delta = vec![0.0; n];
    for i in 0..n {
        delta[i] = -(u[i] * v[i] / base_diag[i]);
    }
    setup.vector_update += 1;
    a.add_to_diag(&delta)
}

fn tol_solver(label: &str, a: &CsrMatrix, cfg: &PrecondConfig) -> Result<InnerSolver> {
    InnerSolver::vcycle_to_tol(label, a, cfg.inner_tol, cfg.inner_max_cycles, &cfg.amg)
}

fn dispatched(label: &str, a: &CsrMatrix, sweeps: usize, cfg: &PrecondConfig) -> Result<InnerSolver> {
    InnerSolver::dispatch(label, a, cfg.indicators.theta_wd, sweeps, &cfg.amg)
}

impl Schur1State {
    pub(crate) fn build(
        s: &BlockSystem,
        active_groups: &[usize],
        ion_active: bool,
        cfg: &PrecondConfig,
        setup: &mut OperationCounters,
    ) -> Result<Self> {
        let n = s.block_size();
        let a_e = s.block(VarId::Electron);
        if cfg.exact_dense {
            return Self::build_exact(s, active_groups, ion_active);
        }

        // C_E approximated with diag(A_I)^-1, then the group complements
        // with diag(C_E_hat)^-1
        let (c_e_hat, ion) = if ion_active {
            let a_i = s.block(VarId::Ion);
            let hat = hat_matrix(a_e, s.d_ei(), s.d_ie(), &a_i.diag(), setup)?;
            let ion_solver = tol_solver("A_I", a_i, cfg)?;
            (
                hat,
                Some(SchurIon {
                    d_ei: s.d_ei().clone(),
                    d_ie: s.d_ie().clone(),
                    solver: ion_solver,
                }),
            )
        } else {
            (a_e.clone(), None)
        };

        let e_solver = match (cfg.schur_fixed_point_sweeps, ion_active) {
            (Some(sweeps), true) => {
                // accurate mode: C_E^-1 through the coupled iteration
                let primary = dispatched("A_E", a_e, cfg.sweeps_ei, cfg)?;
                let other = dispatched("A_I", s.block(VarId::Ion), cfg.sweeps_ei, cfg)?;
                InnerSolver::fixed_point(
                    "C_E",
                    primary,
                    other,
                    s.d_ei().clone(),
                    s.d_ie().clone(),
                    sweeps,
                )?
            }
            _ => tol_solver("C_E", &c_e_hat, cfg)?,
        };

        let c_e_diag = c_e_hat.diag();
        let mut groups = Vec::with_capacity(active_groups.len());
        for &gi in active_groups {
            let a_g = s.block(VarId::Group(gi));
            let hat = hat_matrix(a_g, s.d_ge(gi), s.d_eg(gi), &c_e_diag, setup)?;
            groups.push(SchurGroup {
                d_ge: s.d_ge(gi).clone(),
                d_eg: s.d_eg(gi).clone(),
                solver: tol_solver(&format!("C_{}", gi + 1), &hat, cfg)?,
            });
        }

        Ok(Schur1State {
            n,
            groups,
            e_solver,
            ion,
            c_e_hat: Some(c_e_hat),
        })
    }

    /// Exact complements formed densely and factored; the oracle mode.
    fn build_exact(s: &BlockSystem, active_groups: &[usize], ion_active: bool) -> Result<Self> {
        let n = s.block_size();
        let a_e = s.block(VarId::Electron).to_dense();
        let (c_e, ion) = if ion_active {
            let inv_i = s.block(VarId::Ion).to_dense().inverse()?;
            let mut c_e = a_e.clone();
            for i in 0..n {
                for j in 0..n {
                    c_e.set(
                        i,
                        j,
                        c_e.get(i, j) - s.d_ei()[i] * inv_i.get(i, j) * s.d_ie()[j],
                    );
                }
            }
            let ion_solver = InnerSolver::direct("A_I", s.block(VarId::Ion))?;
            (
                c_e,
                Some(SchurIon {
                    d_ei: s.d_ei().clone(),
                    d_ie: s.d_ie().clone(),
                    solver: ion_solver,
                }),
            )
        } else {
            (a_e, None)
        };
        let inv_ce = c_e.inverse()?;
        let mut groups = Vec::with_capacity(active_groups.len());
        for &gi in active_groups {
            let mut c_g = s.block(VarId::Group(gi)).to_dense();
            for i in 0..n {
                for j in 0..n {
                    c_g.set(
                        i,
                        j,
                        c_g.get(i, j) - s.d_ge(gi)[i] * inv_ce.get(i, j) * s.d_eg(gi)[j],
                    );
                }
            }
            groups.push(SchurGroup {
                d_ge: s.d_ge(gi).clone(),
                d_eg: s.d_eg(gi).clone(),
                solver: InnerSolver::direct_dense(&format!("C_{}", gi + 1), &c_g)?,
            });
        }
        Ok(Schur1State {
            n,
            groups,
            e_solver: InnerSolver::direct_dense("C_E", &c_e)?,
            ion,
            c_e_hat: None,
        })
    }

    pub(crate) fn apply(&self, b: &SubRhs, c: &mut OperationCounters) -> Result<SubSol> {
        let n = self.n;

        // 1: intermediate ion segment
        let w_i_star = match (&self.ion, b.ion) {
            (Some(ion), Some(bi)) => Some(ion.solver.solve(bi, c)?),
            _ => None,
        };

        // 2: intermediate electron segment through C_E
        let mut rhs_e = b.e.to_vec();
        if let (Some(ion), Some(wi)) = (&self.ion, w_i_star.as_ref()) {
            for i in 0..n {
                rhs_e[i] -= ion.d_ei[i] * wi[i];
            }
            c.hadamard += 1;
            c.vector_update += 1;
        }
        let w_e_star = self.e_solver.solve(&rhs_e, c)?;

        // 3: group solves
        let mut w_groups = Vec::with_capacity(self.groups.len());
        for (grp, bg) in self.groups.iter().zip(b.groups.iter()) {
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] = bg[i] - grp.d_ge[i] * w_e_star[i];
            }
            c.hadamard += 1;
            c.vector_update += 1;
            w_groups.push(grp.solver.solve(&rhs, c)?);
        }

        // 4: corrected electron segment
        let mut acc = vec![0.0; n];
        for (grp, wg) in self.groups.iter().zip(w_groups.iter()) {
            for i in 0..n {
                acc[i] += grp.d_eg[i] * wg[i];
            }
            c.hadamard += 1;
            c.vector_update += 1;
        }
        let corr = self.e_solver.solve(&acc, c)?;
        let mut w_e = w_e_star;
        for i in 0..n {
            w_e[i] -= corr[i];
        }
        c.vector_update += 1;

        // 5: corrected ion segment
        let w_ion = match (&self.ion, w_i_star) {
            (Some(ion), Some(mut wi)) => {
                let mut t = vec![0.0; n];
                for i in 0..n {
                    t[i] = ion.d_ie[i] * w_e[i];
                }
                c.hadamard += 1;
                let corr = ion.solver.solve(&t, c)?;
                for i in 0..n {
                    wi[i] -= corr[i];
                }
                c.vector_update += 1;
                Some(wi)
            }
            _ => None,
        };

        Ok(SubSol {
            groups: w_groups,
            e: w_e,
            ion: w_ion,
        })
    }
}

impl Schur2State {
    pub(crate) fn build(
        s: &BlockSystem,
        active_groups: &[usize],
        ion_active: bool,
        cfg: &PrecondConfig,
        setup: &mut OperationCounters,
    ) -> Result<Self> {
        let n = s.block_size();
        let a_e = s.block(VarId::Electron);
        if cfg.exact_dense {
            return Self::build_exact(s, active_groups, ion_active);
        }

        let e_solver = tol_solver("A_E", a_e, cfg)?;
        let e_diag = a_e.diag();
        let mut groups = Vec::with_capacity(active_groups.len());
        let mut s_hats = Vec::with_capacity(active_groups.len() + 1);
        for &gi in active_groups {
            let hat = hat_matrix(s.block(VarId::Group(gi)), s.d_ge(gi), s.d_eg(gi), &e_diag, setup)?;
            groups.push(SchurGroup {
                d_ge: s.d_ge(gi).clone(),
                d_eg: s.d_eg(gi).clone(),
                solver: tol_solver(&format!("S_{}", gi + 1), &hat, cfg)?,
            });
            s_hats.push(hat);
        }
        let ion = if ion_active {
            let a_i = s.block(VarId::Ion);
            let solver = match cfg.schur_fixed_point_sweeps {
                Some(sweeps) => {
                    let primary = dispatched("A_I", a_i, cfg.sweeps_ei, cfg)?;
                    let other = dispatched("A_E", a_e, cfg.sweeps_ei, cfg)?;
                    InnerSolver::fixed_point(
                        "S_I",
                        primary,
                        other,
                        s.d_ie().clone(),
                        s.d_ei().clone(),
                        sweeps,
                    )?
                }
                None => {
                    let hat = hat_matrix(a_i, s.d_ie(), s.d_ei(), &e_diag, setup)?;
                    let solver = tol_solver("S_I", &hat, cfg)?;
                    s_hats.push(hat);
                    solver
                }
            };
            Some(SchurIon {
                d_ei: s.d_ei().clone(),
                d_ie: s.d_ie().clone(),
                solver,
            })
        } else {
            None
        };

        Ok(Schur2State {
            n,
            groups,
            e_solver,
            ion,
            s_hats,
        })
    }

    fn build_exact(s: &BlockSystem, active_groups: &[usize], ion_active: bool) -> Result<Self> {
        let n = s.block_size();
        let inv_e = s.block(VarId::Electron).to_dense().inverse()?;
        let schur_of = |a: &CsrMatrix, u: &DenseVector, v: &DenseVector| -> DenseMatrix {
            let mut m = a.to_dense();
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, m.get(i, j) - u[i] * inv_e.get(i, j) * v[j]);
                }
            }
            m
        };
        let mut groups = Vec::with_capacity(active_groups.len());
        for &gi in active_groups {
            let m = schur_of(s.block(VarId::Group(gi)), s.d_ge(gi), s.d_eg(gi));
            groups.push(SchurGroup {
                d_ge: s.d_ge(gi).clone(),
                d_eg: s.d_eg(gi).clone(),
                solver: InnerSolver::direct_dense(&format!("S_{}", gi + 1), &m)?,
            });
        }
        let ion = if ion_active {
            let m = schur_of(s.block(VarId::Ion), s.d_ie(), s.d_ei());
            Some(SchurIon {
                d_ei: s.d_ei().clone(),
                d_ie: s.d_ie().clone(),
                solver: InnerSolver::direct_dense("S_I", &m)?,
            })
        } else {
            None
        };
        Ok(Schur2State {
            n,
            groups,
            e_solver: InnerSolver::direct("A_E", s.block(VarId::Electron))?,
            ion,
            s_hats: Vec::new(),
        })
    }

    pub(crate) fn apply(&self, b: &SubRhs, c: &mut OperationCounters) -> Result<SubSol> {
        let n = self.n;

        // 1: intermediate electron segment
        let w_e_star = self.e_solver.solve(b.e, c)?;

        // 2: group and ion complement solves
        let mut w_groups = Vec::with_capacity(self.groups.len());
        for (grp, bg) in self.groups.iter().zip(b.groups.iter()) {
            let mut rhs = vec![0.0; n];
            for i in 0..n {
                rhs[i] = bg[i] - grp.d_ge[i] * w_e_star[i];
            }
            c.hadamard += 1;
            c.vector_update += 1;
            w_groups.push(grp.solver.solve(&rhs, c)?);
        }
        let w_ion = match (&self.ion, b.ion) {
            (Some(ion), Some(bi)) => {
                let mut rhs = vec![0.0; n];
                for i in 0..n {
                    rhs[i] = bi[i] - ion.d_ie[i] * w_e_star[i];
                }
                c.hadamard += 1;
                c.vector_update += 1;
                Some(ion.solver.solve(&rhs, c)?)
            }
            _ => None,
        };

        // 3: corrected electron segment
        let mut acc = vec![0.0; n];
        for (grp, wg) in self.groups.iter().zip(w_groups.iter()) {
            for i in 0..n {
                acc[i] += grp.d_eg[i] * wg[i];
            }
            c.hadamard += 1;
            c.vector_update += 1;
        }
        if let (Some(ion), Some(wi)) = (&self.ion, w_ion.as_ref()) {
            for i in 0..n {
                acc[i] += ion.d_ei[i] * wi[i];
            }
            c.hadamard += 1;
            c.vector_update += 1;
        }
        let corr = self.e_solver.solve(&acc, c)?;
        let mut w_e = w_e_star;
        for i in 0..n {
            w_e[i] -= corr[i];
        }
        c.vector_update += 1;

        Ok(SubSol {
            groups: w_groups,
            e: w_e,
            ion: w_ion,
        })
    }
}
