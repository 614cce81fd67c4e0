//! Instrumented operation counters for the setup and preconditioning phases.
//!
//! `matrix_inverse` counts one per inner block solve regardless of how the
//! solve is approximated; inner iteration work is tracked separately per
//! block label.  Matrix updates confined to diagonal entries count as vector
//! updates.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperationCounters {
    pub matrix_inverse: u64,
    pub matvec: u64,
    pub hadamard: u64,
    pub vector_update: u64,
    pub matrix_update: u64,
    /// V-cycle / Jacobi / fixed-point step counts keyed by block label.
    pub inner_cycles: BTreeMap<String, u64>,
}

impl OperationCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    pub fn add_cycles(&mut self, label: &str, n: u64) {
        if n > 0 {
            *self.inner_cycles.entry(label.to_string()).or_insert(0) += n;
        }
    }

    pub fn inner_cycles_total(&self) -> u64 {
        self.inner_cycles.values().sum()
    }

    pub fn merge(&mut self, other: &OperationCounters) {
        self.matrix_inverse += other.matrix_inverse;
        self.matvec += other.matvec;
        self.hadamard += other.hadamard;
        self.vector_update += other.vector_update;
        self.matrix_update += other.matrix_update;
        for (k, v) in &other.inner_cycles {
            *self.inner_cycles.entry(k.clone()).or_insert(0) += v;
        }
    }
}
