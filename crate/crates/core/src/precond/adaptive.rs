//! First-level adaptivity: weakly coupled variables are extracted from the
//! preconditioning matrix and solved independently, the rest are handed to
//! the underlying block preconditioner on the reduced system.

use super::counters::OperationCounters;
use super::inner::InnerSolver;
use super::pctl::PctlState;
use super::schur::{Schur1State, Schur2State};
use super::{PrecondConfig, PrecondKind, SubRhs, SubSol};
use crate::block::{weak_coupling_factor, BlockSystem, VarId};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[allow(clippy::large_enum_variant)]
pub(crate) enum AdaptiveCore {
    Pctl(PctlState),
    Schur1(Schur1State),
    Schur2(Schur2State),
    /// everything but the electron variable was extracted
    ElectronOnly(InnerSolver),
}

pub(crate) struct AdaptiveState {
    /// (segment slot, independent solver) for each extracted variable
    extracted: Vec<(usize, InnerSolver)>,
    pub(crate) active_groups: Vec<usize>,
    pub(crate) ion_active: bool,
    pub(crate) skip_coarse: bool,
    pub(crate) core: AdaptiveCore,
}

impl AdaptiveState {
    pub(crate) fn build(
        kind: PrecondKind,
        s: &BlockSystem,
        cfg: &PrecondConfig,
        setup: &mut OperationCounters,
    ) -> Result<Self> {
        let g = s.groups();
        let theta = cfg.indicators.theta_wc;
        let sigma = cfg.indicators.sigma_wc;

        let mut extracted = Vec::new();
        let mut active_groups = Vec::new();
        for gi in 0..g {
            let gamma = weak_coupling_factor(s.d_ge(gi), s.block(VarId::Group(gi)), theta);
            if gamma > sigma {
                extracted.push((
                    gi,
                    solo_solver(
                        &format!("A_{}", gi + 1),
                        s.block(VarId::Group(gi)),
                        cfg.sweeps_radiation,
                        cfg,
                    )?,
                ));
            } else {
                active_groups.push(gi);
            }
        }
        let gamma_ie = weak_coupling_factor(s.d_ie(), s.block(VarId::Ion), theta);
        let ion_active = gamma_ie <= sigma;
        if !ion_active {
            extracted.push((
                g + 1,
                solo_solver("A_I", s.block(VarId::Ion), cfg.sweeps_ei, cfg)?,
            ));
        }

        let mut skip_coarse = false;
        let core = if active_groups.is_empty() && !ion_active {
            AdaptiveCore::ElectronOnly(solo_solver(
                "A_E",
                s.block(VarId::Electron),
                cfg.sweeps_ei,
                cfg,
            )?)
        } else {
            match kind {
                PrecondKind::Pctl => {
                    skip_coarse =
                        PctlState::may_skip_coarse(s, &active_groups, ion_active, theta, sigma);
                    AdaptiveCore::Pctl(PctlState::build(
                        s,
                        &active_groups,
                        ion_active,
                        skip_coarse,
                        cfg,
                        setup,
                    )?)
                }
                PrecondKind::Schur1 => AdaptiveCore::Schur1(Schur1State::build(
                    s,
                    &active_groups,
                    ion_active,
                    cfg,
                    setup,
                )?),
                PrecondKind::Schur2 => AdaptiveCore::Schur2(Schur2State::build(
                    s,
                    &active_groups,
                    ion_active,
                    cfg,
                    setup,
                )?),
                _ => {
                    return Err(Error::InvalidParam(
                        "adaptive wrapper applies to block preconditioners only".into(),
                    ))
                }
            }
        };

        Ok(AdaptiveState {
            extracted,
            active_groups,
            ion_active,
            skip_coarse,
            core,
        })
    }

    pub(crate) fn apply(
        &self,
        g: usize,
        n: usize,
        b: &[f64],
        c: &mut OperationCounters,
    ) -> Result<Vec<f64>> {
        let seg = |slot: usize| &b[slot * n..(slot + 1) * n];
        let mut out = vec![0.0; b.len()];

        for (slot, solver) in &self.extracted {
            let w = solver.solve(seg(*slot), c)?;
            out[slot * n..(slot + 1) * n].copy_from_slice(&w);
        }

        match &self.core {
            AdaptiveCore::ElectronOnly(solver) => {
                let w = solver.solve(seg(g), c)?;
                out[g * n..(g + 1) * n].copy_from_slice(&w);
            }
            core => {
                let sub = SubRhs {
                    groups: self.active_groups.iter().map(|&gi| seg(gi)).collect(),
                    e: seg(g),
                    ion: if self.ion_active { Some(seg(g + 1)) } else { None },
                };
                let sol: SubSol = match core {
                    AdaptiveCore::Pctl(st) => st.apply(&sub, c)?,
                    AdaptiveCore::Schur1(st) => st.apply(&sub, c)?,
                    AdaptiveCore::Schur2(st) => st.apply(&sub, c)?,
                    AdaptiveCore::ElectronOnly(_) => unreachable!(),
                };
                for (&gi, w) in self.active_groups.iter().zip(sol.groups.iter()) {
                    out[gi * n..(gi + 1) * n].copy_from_slice(w);
                }
                out[g * n..(g + 1) * n].copy_from_slice(&sol.e);
                if let Some(wi) = sol.ion {
                    out[(g + 1) * n..(g + 2) * n].copy_from_slice(&wi);
                }
            }
        }
        Ok(out)
    }

    pub(crate) fn extracted_vars(&self, g: usize) -> Vec<VarId> {
        self.extracted
            .iter()
            .map(|(slot, _)| {
                if *slot < g {
                    VarId::Group(*slot)
                } else {
                    VarId::Ion
                }
            })
            .collect()
    }
}

/// Independent solve for an extracted variable (fast-path dispatch, or the
/// exact factorization in oracle mode).
pub(crate) fn solo_solver(
    label: &str,
    a: &CsrMatrix,
    sweeps: usize,
    cfg: &PrecondConfig,
) -> Result<InnerSolver> {
    if cfg.exact_dense {
        InnerSolver::direct(label, a)
    } else {
        InnerSolver::dispatch(label, a, cfg.indicators.theta_wd, sweeps, &cfg.amg)
    }
}
