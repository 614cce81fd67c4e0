//! The (G+2)x(G+2) block data model: G radiation-group blocks, an electron
//! block and an ion block with diagonal couplings, plus the coupling
//! indicators used by the adaptive preconditioning strategy.

pub mod manifest;

use crate::error::{Error, Result};
use crate::sparse::{hadamard, CsrMatrix, DenseVector};

/// Physical variable identifier within a block system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarId {
    /// 0-based group index.
    Group(usize),
    Electron,
    Ion,
}

impl std::fmt::Display for VarId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VarId::Group(g) => write!(f, "{}", g + 1),
            VarId::Electron => write!(f, "E"),
            VarId::Ion => write!(f, "I"),
        }
    }
}

/// Block-structured linear system: sparse diagonal blocks `A_alpha` and
/// diagonal coupling terms stored as vectors.
///
/// Couplings between a group and the electron variable are one-directional
/// pairs `D_gE != D_Eg`; the electron/ion coupling satisfies `D_EI = D_IE`.
/// Zero coupling entries are allowed and represent decoupled rows.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    g: usize,
    n: usize,
    a_groups: Vec<CsrMatrix>,
    a_electron: CsrMatrix,
    a_ion: CsrMatrix,
    d_ge: Vec<DenseVector>,
    d_eg: Vec<DenseVector>,
    d_ei: DenseVector,
    d_ie: DenseVector,
    rhs: Vec<DenseVector>,
}

impl BlockSystem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        a_groups: Vec<CsrMatrix>,
        a_electron: CsrMatrix,
        a_ion: CsrMatrix,
        d_ge: Vec<DenseVector>,
        d_eg: Vec<DenseVector>,
        d_ei: DenseVector,
        d_ie: DenseVector,
        rhs: Vec<DenseVector>,
    ) -> Result<Self> {
        let g = a_groups.len();
        let n = a_electron.n_rows();
        if d_ge.len() != g || d_eg.len() != g {
            return Err(Error::DimensionMismatch(format!(
                "{} groups with {} D_gE and {} D_Eg couplings",
                g,
                d_ge.len(),
                d_eg.len()
            )));
        }
        if rhs.len() != g + 2 {
            return Err(Error::DimensionMismatch(format!(
                "expected {} rhs segments, got {}",
                g + 2,
                rhs.len()
            )));
        }
        for (label, a) in a_groups
            .iter()
            .enumerate()
            .map(|(i, a)| (VarId::Group(i), a))
            .chain([(VarId::Electron, &a_electron), (VarId::Ion, &a_ion)])
        {
            if !a.is_square() || a.n_rows() != n {
                return Err(Error::InvalidMatrix(format!(
                    "block A_{label} is {}x{}, expected {n}x{n}",
                    a.n_rows(),
                    a.n_cols()
                )));
            }
            for (k, d) in a.diag().iter().enumerate() {
                if *d <= 0.0 {
                    return Err(Error::InvalidMatrix(format!(
                        "block A_{label} has nonpositive diagonal {d} at row {k}"
                    )));
                }
            }
        }
        for (i, v) in d_ge.iter().chain(d_eg.iter()).enumerate() {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "coupling vector {i} has length {}, expected {n}",
                    v.len()
                )));
            }
        }
        if d_ei.len() != n || d_ie.len() != n {
            return Err(Error::DimensionMismatch(
                "electron/ion coupling length mismatch".into(),
            ));
        }
        if d_ei.as_slice() != d_ie.as_slice() {
            return Err(Error::InvalidMatrix(
                "electron/ion couplings must satisfy D_EI = D_IE".into(),
            ));
        }
        for (i, v) in rhs.iter().enumerate() {
            if v.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "rhs segment {i} has length {}, expected {n}",
                    v.len()
                )));
            }
        }
        Ok(BlockSystem {
            g,
            n,
            a_groups,
            a_electron,
            a_ion,
            d_ge,
            d_eg,
            d_ei,
            d_ie,
            rhs,
        })
    }

    pub fn groups(&self) -> usize {
        self.g
    }

    /// Per-variable size.
    pub fn block_size(&self) -> usize {
        self.n
    }

    /// Total unknowns (G+2)*N.
    pub fn total_size(&self) -> usize {
        (self.g + 2) * self.n
    }

    pub fn block(&self, var: VarId) -> &CsrMatrix {
        match var {
            VarId::Group(i) => &self.a_groups[i],
            VarId::Electron => &self.a_electron,
            VarId::Ion => &self.a_ion,
        }
    }

    /// D_gE for 0-based group `i`.
    pub fn d_ge(&self, i: usize) -> &DenseVector {
        &self.d_ge[i]
    }

    /// D_Eg for 0-based group `i`.
    pub fn d_eg(&self, i: usize) -> &DenseVector {
        &self.d_eg[i]
    }

    pub fn d_ei(&self) -> &DenseVector {
        &self.d_ei
    }

    pub fn d_ie(&self) -> &DenseVector {
        &self.d_ie
    }

    pub fn rhs(&self) -> BlockVector {
        BlockVector {
            n: self.n,
            segments: self.rhs.clone(),
        }
    }

    pub fn rhs_segment(&self, var: VarId) -> &DenseVector {
        match var {
            VarId::Group(i) => &self.rhs[i],
            VarId::Electron => &self.rhs[self.g],
            VarId::Ion => &self.rhs[self.g + 1],
        }
    }

    /// Assembles the (G+2)N monolithic matrix in variable-major ordering:
    /// all group-1 cells, ..., all group-G cells, all electron cells, all
    /// ion cells.  Exact zero coupling entries are omitted.
    pub fn to_monolithic(&self) -> CsrMatrix {
        let g = self.g;
        let n = self.n;
        let total = self.total_size();
        let e_off = g * n;
        let i_off = (g + 1) * n;

        let mut row_ptr = Vec::with_capacity(total + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);

        // group rows: A_g entries then the D_gE coupling at the E offset
        for gi in 0..g {
            let a = &self.a_groups[gi];
            let off = gi * n;
            for i in 0..n {
                for (j, v) in a.row(i) {
                    col_idx.push(off + j);
                    values.push(v);
                }
                let d = self.d_ge[gi][i];
                if d != 0.0 {
                    col_idx.push(e_off + i);
                    values.push(d);
                }
                row_ptr.push(col_idx.len());
            }
        }
        // electron rows: D_Eg couplings, A_E entries, D_EI coupling
        for i in 0..n {
            for gi in 0..g {
                let d = self.d_eg[gi][i];
                if d != 0.0 {
                    col_idx.push(gi * n + i);
                    values.push(d);
                }
            }
            for (j, v) in self.a_electron.row(i) {
                col_idx.push(e_off + j);
                values.push(v);
            }
            let d = self.d_ei[i];
            if d != 0.0 {
                col_idx.push(i_off + i);
                values.push(d);
            }
            row_ptr.push(col_idx.len());
        }
        // ion rows: D_IE coupling then A_I entries
        for i in 0..n {
            let d = self.d_ie[i];
            if d != 0.0 {
                col_idx.push(e_off + i);
                values.push(d);
            }
            for (j, v) in self.a_ion.row(i) {
                col_idx.push(i_off + j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }

        CsrMatrix::new(total, total, row_ptr, col_idx, values)
            .expect("monolithic assembly preserves CSR invariants")
    }

    /// r = b - A x computed blockwise with Hadamard products for couplings.
    pub fn block_residual(&self, x: &BlockVector) -> Result<BlockVector> {
        if x.segments.len() != self.g + 2 || x.n != self.n {
            return Err(Error::DimensionMismatch(
                "block_residual: vector does not match system shape".into(),
            ));
        }
        let mut out = Vec::with_capacity(self.g + 2);
        let xe = x.electron(self.g);
        for gi in 0..self.g {
            let mut r = self.rhs[gi].clone();
            let ax = self.a_groups[gi].spmv(x.group(gi))?;
            let cpl = hadamard(&self.d_ge[gi], xe)?;
            for i in 0..self.n {
                r[i] -= ax[i] + cpl[i];
            }
            out.push(r);
        }
        {
            let mut r = self.rhs[self.g].clone();
            let ax = self.a_electron.spmv(xe)?;
            for i in 0..self.n {
                r[i] -= ax[i];
            }
            for gi in 0..self.g {
                let cpl = hadamard(&self.d_eg[gi], x.group(gi))?;
                for i in 0..self.n {
                    r[i] -= cpl[i];
                }
            }
            let cpl = hadamard(&self.d_ei, x.ion(self.g))?;
            for i in 0..self.n {
                r[i] -= cpl[i];
            }
            out.push(r);
        }
        {
            let mut r = self.rhs[self.g + 1].clone();
            let ax = self.a_ion.spmv(x.ion(self.g))?;
            let cpl = hadamard(&self.d_ie, xe)?;
            for i in 0..self.n {
                r[i] -= ax[i] + cpl[i];
            }
            out.push(r);
        }
        Ok(BlockVector {
            n: self.n,
            segments: out,
        })
    }
}

/// Vector partitioned into G+2 equal segments (groups, electron, ion).
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    n: usize,
    segments: Vec<DenseVector>,
}

impl BlockVector {
    pub fn zeros(g: usize, n: usize) -> Self {
        BlockVector {
            n,
            segments: vec![DenseVector::zeros(n); g + 2],
        }
    }

    pub fn from_segments(segments: Vec<DenseVector>) -> Result<Self> {
        let n = segments.first().map(|s| s.len()).unwrap_or(0);
        if segments.len() < 2 {
            return Err(Error::DimensionMismatch(
                "block vector needs at least electron and ion segments".into(),
            ));
        }
        if segments.iter().any(|s| s.len() != n) {
            return Err(Error::DimensionMismatch(
                "block vector segments of unequal length".into(),
            ));
        }
        Ok(BlockVector { n, segments })
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn segment_len(&self) -> usize {
        self.n
    }

    pub fn group(&self, i: usize) -> &DenseVector {
        &self.segments[i]
    }

    pub fn electron(&self, g: usize) -> &DenseVector {
        &self.segments[g]
    }

    pub fn ion(&self, g: usize) -> &DenseVector {
        &self.segments[g + 1]
    }

    pub fn segment(&self, i: usize) -> &DenseVector {
        &self.segments[i]
    }

    pub fn segment_mut(&mut self, i: usize) -> &mut DenseVector {
        &mut self.segments[i]
    }

    /// Variable-major flattening (matches [`BlockSystem::to_monolithic`]).
    pub fn flatten(&self) -> DenseVector {
        let mut out = Vec::with_capacity(self.segments.len() * self.n);
        for s in &self.segments {
            out.extend_from_slice(s.as_slice());
        }
        DenseVector::new(out).expect("segments are finite")
    }

    pub fn from_flat(flat: &[f64], g: usize, n: usize) -> Result<Self> {
        if flat.len() != (g + 2) * n {
            return Err(Error::DimensionMismatch(format!(
                "flat vector length {} does not match (G+2)N = {}",
                flat.len(),
                (g + 2) * n
            )));
        }
        let segments = flat
            .chunks_exact(n)
            .map(|c| DenseVector::new(c.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(BlockVector { n, segments })
    }

    pub fn norm2(&self) -> f64 {
        let mut acc = 0.0;
        for s in &self.segments {
            for v in s.iter() {
                acc += v * v;
            }
        }
        acc.sqrt()
    }
}

/// Thresholds for the diagonal-dominance and coupling-strength indicators.
#[derive(Debug, Clone, Copy)]
pub struct IndicatorConfig {
    pub theta_wd: f64,
    pub theta_wc: f64,
    pub sigma_wc: f64,
}

impl Default for IndicatorConfig {
    fn default() -> Self {
        IndicatorConfig {
            theta_wd: 0.9,
            theta_wc: 1e-2,
            sigma_wc: 0.5,
        }
    }
}

impl IndicatorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("theta_wd", self.theta_wd),
            ("theta_wc", self.theta_wc),
            ("sigma_wc", self.sigma_wc),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(Error::InvalidParam(format!("{name} = {v} outside (0,1)")));
            }
        }
        Ok(())
    }
}

/// Fraction of rows whose signed row sum falls below `theta_wd * a_kk`.
/// Implemented literally with signed sums; rows with large positive
/// off-diagonal entries may classify counterintuitively.
pub fn weak_diag_dominance_factor(a: &CsrMatrix, theta_wd: f64) -> Result<f64> {
    assert!(a.is_square(), "weak-dominance factor of non-square matrix");
    let n = a.n_rows();
    if n == 0 {
        return Ok(0.0);
    }
    let diag = a.diag();
    for (k, d) in diag.iter().enumerate() {
        if *d <= 0.0 {
            return Err(Error::InvalidMatrix(format!(
                "weak-dominance factor requires positive diagonal, row {k} has {d}"
            )));
        }
    }
    let sums = a.row_sums();
    let mut count = 0usize;
    for k in 0..n {
        if sums[k] < theta_wd * diag[k] {
            count += 1;
        }
    }
    Ok(count as f64 / n as f64)
}

/// Fraction of rows where the coupling diagonal is negligible:
/// `-d_kk <= theta_wc * a_kk`.
pub fn weak_coupling_factor(d_diag: &DenseVector, a: &CsrMatrix, theta_wc: f64) -> f64 {
    assert!(a.is_square(), "weak-coupling factor of non-square matrix");
    assert_eq!(d_diag.len(), a.n_rows(), "coupling length mismatch");
    let n = a.n_rows();
    if n == 0 {
        return 1.0;
    }
    let diag = a.diag();
    let mut count = 0usize;
    for k in 0..n {
        if -d_diag[k] <= theta_wc * diag[k] {
            count += 1;
        }
    }
    count as f64 / n as f64
}
