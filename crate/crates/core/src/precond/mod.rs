//! Preconditioners for the block systems: monolithic AMG, the
//! physical-variable based coarsening two-level scheme (PCTL) and two block
//! Schur complement schemes, each with an adaptive variant that extracts
//! weakly coupled physical variables, plus the block diagonal degeneration.
//!
//! Every preconditioner exposes a uniform `apply(b) -> w` interface over
//! flat monolithic vectors (with a block-vector convenience wrapper) and
//! accumulates operation counts into a caller-owned [`OperationCounters`].
//! State is immutable after build, so concurrent applies on distinct
//! vectors are safe.

mod adaptive;
mod counters;
mod inner;
mod pctl;
mod schur;

pub use counters::OperationCounters;
pub use inner::InnerSolver;

use crate::amg::{amg_setup, AmgHierarchy, AmgParams};
use crate::block::{BlockSystem, BlockVector, IndicatorConfig, VarId};
use crate::error::{Error, Result};
use crate::krylov::LinearOperator;
use crate::sparse::{CsrMatrix, DenseMatrix, DenseVector};
use adaptive::{solo_solver, AdaptiveState};
use pctl::PctlState;
use schur::{Schur1State, Schur2State};
use std::cell::RefCell;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrecondKind {
    /// no preconditioning
    None,
    /// one V-cycle of classical AMG on the monolithic matrix
    AmgMono,
    Pctl,
    Schur1,
    Schur2,
}

/// Maps a benchmark preconditioner name to (kind, adaptive flag).
pub fn parse_precond_name(name: &str) -> Result<(PrecondKind, bool)> {
    match name {
        "none" => Ok((PrecondKind::None, false)),
        "amg" => Ok((PrecondKind::AmgMono, false)),
        "pctl" => Ok((PrecondKind::Pctl, false)),
        "schur1" => Ok((PrecondKind::Schur1, false)),
        "schur2" => Ok((PrecondKind::Schur2, false)),
        "apctl" => Ok((PrecondKind::Pctl, true)),
        "aschur1" => Ok((PrecondKind::Schur1, true)),
        "aschur2" => Ok((PrecondKind::Schur2, true)),
        other => Err(Error::InvalidParam(format!("unknown preconditioner {other}"))),
    }
}

#[derive(Debug, Clone)]
pub struct PrecondConfig {
    pub kind: PrecondKind,
    pub adaptive: bool,
    pub indicators: IndicatorConfig,
    /// fixed sweeps for radiation-group block solves on the fast path
    pub sweeps_radiation: usize,
    /// fixed sweeps for electron/ion (and coarse) block solves
    pub sweeps_ei: usize,
    /// stopping tolerance wherever V-cycles iterate to accuracy
    pub inner_tol: f64,
    /// termination cap for tolerance-driven inner solves
    pub inner_max_cycles: usize,
    pub amg: AmgParams,
    /// oracle mode: exact dense inner solves and exact Schur complements
    pub exact_dense: bool,
    /// apply the ion/electron Schur complement through the coupled
    /// fixed-point iteration with this many steps
    pub schur_fixed_point_sweeps: Option<usize>,
}

impl Default for PrecondConfig {
    fn default() -> Self {
        PrecondConfig {
            kind: PrecondKind::AmgMono,
            adaptive: false,
            indicators: IndicatorConfig::default(),
            sweeps_radiation: 3,
            sweeps_ei: 1,
            inner_tol: 1e-2,
            inner_max_cycles: 200,
            amg: AmgParams::default(),
            exact_dense: false,
            schur_fixed_point_sweeps: None,
        }
    }
}

impl PrecondConfig {
    pub fn with_kind(kind: PrecondKind, adaptive: bool) -> Self {
        PrecondConfig {
            kind,
            adaptive,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.indicators.validate()?;
        if self.sweeps_radiation == 0 || self.sweeps_ei == 0 {
            return Err(Error::InvalidParam("sweep counts must be >= 1".into()));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::InvalidParam("inner_tol must be > 0".into()));
        }
        if self.adaptive && !matches!(self.kind, PrecondKind::Pctl | PrecondKind::Schur1 | PrecondKind::Schur2) {
            return Err(Error::InvalidParam(
                "adaptive flag applies to block preconditioners only".into(),
            ));
        }
        Ok(())
    }
}

/// rhs of a (possibly reduced) block apply
pub(crate) struct SubRhs<'a> {
    pub groups: Vec<&'a [f64]>,
    pub e: &'a [f64],
    pub ion: Option<&'a [f64]>,
}

/// solution segments of a (possibly reduced) block apply
pub(crate) struct SubSol {
    pub groups: Vec<Vec<f64>>,
    pub e: Vec<f64>,
    pub ion: Option<Vec<f64>>,
}

enum Imp {
    Identity,
    Mono(AmgHierarchy),
    Pctl(PctlState),
    Schur1(Schur1State),
    Schur2(Schur2State),
    Adaptive(AdaptiveState),
    BlockDiag(Vec<InnerSolver>),
}

/// A configured applier `w = M^-1 b` with setup-phase counters.
pub struct Preconditioner {
    label: String,
    groups: usize,
    block_size: usize,
    total: usize,
    setup_counters: OperationCounters,
    imp: Imp,
}

/// Introspection of an adaptive preconditioner's first-level decisions.
#[derive(Debug, Clone)]
pub struct AdaptiveInfo {
    pub extracted: Vec<VarId>,
    pub active_groups: Vec<usize>,
    pub ion_active: bool,
    pub coarse_correction_skipped: bool,
}

impl Preconditioner {
    pub fn identity(n: usize) -> Self {
        Preconditioner {
            label: "none".into(),
            groups: 0,
            block_size: n,
            total: n,
            setup_counters: OperationCounters::new(),
            imp: Imp::Identity,
        }
    }

    /// Monolithic classical AMG: one V-cycle per apply, zero initial guess.
    pub fn mono(a: &CsrMatrix, amg: &AmgParams) -> Result<Self> {
        let h = amg_setup(a, amg)?;
        Ok(Preconditioner {
            label: "amg".into(),
            groups: 0,
            block_size: a.n_rows(),
            total: a.n_rows(),
            setup_counters: OperationCounters::new(),
            imp: Imp::Mono(h),
        })
    }

    /// Builds the configured preconditioner for a block system.
    pub fn for_system(s: &BlockSystem, cfg: &PrecondConfig) -> Result<Self> {
        cfg.validate()?;
        let g = s.groups();
        let n = s.block_size();
        let all: Vec<usize> = (0..g).collect();
        let mut setup = OperationCounters::new();
        let imp = match (cfg.kind, cfg.adaptive) {
            (PrecondKind::None, _) => Imp::Identity,
            (PrecondKind::AmgMono, _) => {
                let h = amg_setup(&s.to_monolithic(), &cfg.amg)?;
                Imp::Mono(h)
            }
            (PrecondKind::Pctl, false) => {
                Imp::Pctl(PctlState::build(s, &all, true, false, cfg, &mut setup)?)
            }
            (PrecondKind::Schur1, false) => {
                Imp::Schur1(Schur1State::build(s, &all, true, cfg, &mut setup)?)
            }
            (PrecondKind::Schur2, false) => {
                Imp::Schur2(Schur2State::build(s, &all, true, cfg, &mut setup)?)
            }
            (kind, true) => Imp::Adaptive(AdaptiveState::build(kind, s, cfg, &mut setup)?),
        };
        let label = match (cfg.kind, cfg.adaptive) {
            (PrecondKind::None, _) => "none",
            (PrecondKind::AmgMono, _) => "amg",
            (PrecondKind::Pctl, false) => "pctl",
            (PrecondKind::Pctl, true) => "apctl",
            (PrecondKind::Schur1, false) => "schur1",
            (PrecondKind::Schur1, true) => "aschur1",
            (PrecondKind::Schur2, false) => "schur2",
            (PrecondKind::Schur2, true) => "aschur2",
        };
        Ok(Preconditioner {
            label: label.into(),
            groups: g,
            block_size: n,
            total: s.total_size(),
            setup_counters: setup,
            imp,
        })
    }

    /// Independent solves on every diagonal block; the degeneration target
    /// of the adaptive strategy under all-weak coupling.
    pub fn block_diagonal(s: &BlockSystem, cfg: &PrecondConfig) -> Result<Self> {
        let g = s.groups();
        let mut solvers = Vec::with_capacity(g + 2);
        for gi in 0..g {
            solvers.push(solo_solver(
                &format!("A_{}", gi + 1),
                s.block(VarId::Group(gi)),
                cfg.sweeps_radiation,
                cfg,
            )?);
        }
        solvers.push(solo_solver("A_E", s.block(VarId::Electron), cfg.sweeps_ei, cfg)?);
        solvers.push(solo_solver("A_I", s.block(VarId::Ion), cfg.sweeps_ei, cfg)?);
        Ok(Preconditioner {
            label: "blockdiag".into(),
            groups: g,
            block_size: s.block_size(),
            total: s.total_size(),
            setup_counters: OperationCounters::new(),
            imp: Imp::BlockDiag(solvers),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn total_size(&self) -> usize {
        self.total
    }

    pub fn setup_counters(&self) -> &OperationCounters {
        &self.setup_counters
    }

    pub fn adaptive_info(&self) -> Option<AdaptiveInfo> {
        match &self.imp {
            Imp::Adaptive(st) => Some(AdaptiveInfo {
                extracted: st.extracted_vars(self.groups),
                active_groups: st.active_groups.clone(),
                ion_active: st.ion_active,
                coarse_correction_skipped: st.skip_coarse,
            }),
            _ => None,
        }
    }

    /// Hierarchy summary of the monolithic AMG variant, for verbose output.
    pub fn mono_summary(&self) -> Option<String> {
        match &self.imp {
            Imp::Mono(h) => Some(h.summary()),
            _ => None,
        }
    }

    #[cfg(test)]
    pub(crate) fn pctl_coarse_operator(&self) -> Option<&CsrMatrix> {
        match &self.imp {
            Imp::Pctl(st) => st.coarse_operator.as_ref(),
            _ => None,
        }
    }

    #[cfg(test)]
    pub(crate) fn pctl_state(&self) -> Option<&PctlState> {
        match &self.imp {
            Imp::Pctl(st) => Some(st),
            _ => None,
        }
    }

    /// w = M^-1 b on the flat monolithic ordering.
    pub fn apply_flat(&self, b: &[f64], counters: &mut OperationCounters) -> Result<Vec<f64>> {
        if b.len() != self.total {
            return Err(Error::DimensionMismatch(format!(
                "preconditioner of size {} applied to vector of length {}",
                self.total,
                b.len()
            )));
        }
        let g = self.groups;
        let n = self.block_size;
        match &self.imp {
            Imp::Identity => Ok(b.to_vec()),
            Imp::Mono(h) => {
                let bv = DenseVector::new(b.to_vec())?;
                let x = h.vcycle(&bv, &DenseVector::zeros(self.total))?;
                counters.add_cycles("A", 1);
                Ok(x.into_vec())
            }
            Imp::Pctl(st) => {
                let sub = full_rhs(b, g, n);
                assemble(st.apply(&sub, counters)?, g, n)
            }
            Imp::Schur1(st) => {
                let sub = full_rhs(b, g, n);
                assemble(st.apply(&sub, counters)?, g, n)
            }
            Imp::Schur2(st) => {
                let sub = full_rhs(b, g, n);
                assemble(st.apply(&sub, counters)?, g, n)
            }
            Imp::Adaptive(st) => st.apply(g, n, b, counters),
            Imp::BlockDiag(solvers) => {
                let mut out = vec![0.0; b.len()];
                for (i, solver) in solvers.iter().enumerate() {
                    let w = solver.solve(&b[i * n..(i + 1) * n], counters)?;
                    out[i * n..(i + 1) * n].copy_from_slice(&w);
                }
                Ok(out)
            }
        }
    }

    /// Block-vector convenience wrapper around [`Self::apply_flat`].
    pub fn apply_block(
        &self,
        b: &BlockVector,
        counters: &mut OperationCounters,
    ) -> Result<BlockVector> {
        let flat = b.flatten();
        let out = self.apply_flat(flat.as_slice(), counters)?;
        BlockVector::from_flat(&out, self.groups, self.block_size)
    }
}

fn full_rhs(b: &[f64], g: usize, n: usize) -> SubRhs<'_> {
    SubRhs {
        groups: (0..g).map(|gi| &b[gi * n..(gi + 1) * n]).collect(),
        e: &b[g * n..(g + 1) * n],
        ion: Some(&b[(g + 1) * n..(g + 2) * n]),
    }
}

fn assemble(sol: SubSol, g: usize, n: usize) -> Result<Vec<f64>> {
    let mut out = vec![0.0; (g + 2) * n];
    for (gi, w) in sol.groups.iter().enumerate() {
        out[gi * n..(gi + 1) * n].copy_from_slice(w);
    }
    out[g * n..(g + 1) * n].copy_from_slice(&sol.e);
    if let Some(wi) = sol.ion {
        out[(g + 1) * n..(g + 2) * n].copy_from_slice(&wi);
    }
    Ok(out)
}

/// Reconstructs the preconditioner's action matrix column by column:
/// column j is `apply(e_j)`.  With exact inner solves this is the dense
/// inverse of the implied preconditioning matrix M.
pub fn implied_preconditioner_dense(p: &Preconditioner, n: usize) -> Result<DenseMatrix> {
    if n != p.total_size() {
        return Err(Error::DimensionMismatch(format!(
            "implied matrix of size {n} from preconditioner of size {}",
            p.total_size()
        )));
    }
    let mut out = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut scratch = OperationCounters::new();
    for j in 0..n {
        e[j] = 1.0;
        let col = p.apply_flat(&e, &mut scratch)?;
        for i in 0..n {
            out.set(i, j, col[i]);
        }
        e[j] = 0.0;
    }
    Ok(out)
}

/// Adapter exposing a preconditioner as a fixed linear operator for GMRES
/// while accumulating its per-apply counters.
pub struct CountingPrecondOperator<'a> {
    p: &'a Preconditioner,
    counters: RefCell<OperationCounters>,
}

impl<'a> CountingPrecondOperator<'a> {
    pub fn new(p: &'a Preconditioner) -> Self {
        CountingPrecondOperator {
            p,
            counters: RefCell::new(OperationCounters::new()),
        }
    }

    pub fn take_counters(self) -> OperationCounters {
        self.counters.into_inner()
    }
}

impl LinearOperator for CountingPrecondOperator<'_> {
    fn size(&self) -> usize {
        self.p.total_size()
    }
    fn apply_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let out = self.p.apply_flat(x, &mut self.counters.borrow_mut())?;
        y.copy_from_slice(&out);
        Ok(())
    }
}
