//! Sparse iterative-solver toolkit for (G+2)x(G+2) block linear systems
//! arising from multi-group radiation diffusion.
//!
//! The crate provides:
//!
//! * [`sparse`] - CSR matrices, dense vectors, dense LU and Matrix Market IO;
//! * [`amg`] - serial classical (Ruge-Stuben style) algebraic multigrid;
//! * [`krylov`] - restarted, right-preconditioned GMRES;
//! * [`block`] - the block system data model, coupling indicators and the
//!   on-disk manifest format;
//! * [`precond`] - monolithic AMG, PCTL and two Schur complement block
//!   preconditioners with inner-solve options, adaptive wrappers and
//!   operation counters;
//! * [`mgdgen`] - a synthetic finite-volume generator of radiation-diffusion
//!   style block systems with three presets.

// validation uses !(x > 0) rather than x <= 0 so NaN parameters fail too;
// indexed loops are kept where kernels walk several arrays in lockstep
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod amg;
pub mod block;
pub mod error;
pub mod krylov;
pub mod mgdgen;
pub mod precond;
pub mod sparse;

#[cfg(test)]
pub(crate) mod test_support;

pub use error::{Error, Result};
