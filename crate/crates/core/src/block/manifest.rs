//! On-disk block-system format: a key=value manifest referencing Matrix
//! Market files for the blocks and plain-text vector files for couplings
//! and right-hand sides.  Paths are relative to the manifest's directory.

use super::BlockSystem;
use crate::error::{Error, Result};
use crate::sparse::io;
use crate::sparse::{CsrMatrix, DenseVector};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Writes the manifest at `path` and the referenced data files next to it,
/// using the manifest's file stem as the filename prefix.
pub fn save(s: &BlockSystem, path: &Path) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("system")
        .to_string();
    let g = s.groups();

    let mut lines: Vec<(String, String)> = Vec::new();
    lines.push(("G".into(), g.to_string()));
    lines.push(("N".into(), s.block_size().to_string()));

    let mut put_matrix = |key: String, file: String, m: &CsrMatrix| -> Result<()> {
        io::write_matrix_market_file(m, dir.join(&file))?;
        lines.push((key, file));
        Ok(())
    };
    for i in 0..g {
        put_matrix(
            format!("A_{}", i + 1),
            format!("{stem}_a_{}.mtx", i + 1),
            s.block(super::VarId::Group(i)),
        )?;
    }
    put_matrix("A_E".into(), format!("{stem}_a_e.mtx"), s.block(super::VarId::Electron))?;
    put_matrix("A_I".into(), format!("{stem}_a_i.mtx"), s.block(super::VarId::Ion))?;

    let mut put_vector = |key: String, file: String, v: &DenseVector| -> Result<()> {
        io::write_vector_file(v, dir.join(&file))?;
        lines.push((key, file));
        Ok(())
    };
    for i in 0..g {
        put_vector(
            format!("D_{}E", i + 1),
            format!("{stem}_d_{}e.vec", i + 1),
            s.d_ge(i),
        )?;
        put_vector(
            format!("D_E{}", i + 1),
            format!("{stem}_d_e{}.vec", i + 1),
            s.d_eg(i),
        )?;
    }
    put_vector("D_EI".into(), format!("{stem}_d_ei.vec"), s.d_ei())?;
    put_vector("D_IE".into(), format!("{stem}_d_ie.vec"), s.d_ie())?;
    for i in 0..g {
        put_vector(
            format!("RHS_{}", i + 1),
            format!("{stem}_rhs_{}.vec", i + 1),
            s.rhs_segment(super::VarId::Group(i)),
        )?;
    }
    put_vector(
        "RHS_E".into(),
        format!("{stem}_rhs_e.vec"),
        s.rhs_segment(super::VarId::Electron),
    )?;
    put_vector(
        "RHS_I".into(),
        format!("{stem}_rhs_i.vec"),
        s.rhs_segment(super::VarId::Ion),
    )?;

    let mut text = String::new();
    for (k, v) in &lines {
        text.push_str(k);
        text.push('=');
        text.push_str(v);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

/// Reads a manifest and all referenced files; the resulting system is
/// validated against every block-system invariant.
pub fn load(path: &Path) -> Result<BlockSystem> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let text = fs::read_to_string(path)?;
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t.split_once('=').ok_or_else(|| {
            Error::Parse(format!("manifest line {} is not key=value: {t}", lineno + 1))
        })?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    let need = |key: &str| -> Result<&String> {
        map.get(key)
            .ok_or_else(|| Error::Parse(format!("manifest missing key {key}")))
    };
    let g: usize = need("G")?
        .parse()
        .map_err(|_| Error::Parse("bad G value".into()))?;
    let n: usize = need("N")?
        .parse()
        .map_err(|_| Error::Parse("bad N value".into()))?;

    let matrix = |key: &str| -> Result<CsrMatrix> {
        let file: PathBuf = dir.join(need(key)?);
        io::read_matrix_market_file(&file)
    };
    let vector = |key: &str| -> Result<DenseVector> {
        let file: PathBuf = dir.join(need(key)?);
        let v = io::read_vector_file(&file)?;
        if v.len() != n {
            return Err(Error::Parse(format!(
                "{key}: vector length {} does not match N = {n}",
                v.len()
            )));
        }
        Ok(v)
    };

    let mut a_groups = Vec::with_capacity(g);
    let mut d_ge = Vec::with_capacity(g);
    let mut d_eg = Vec::with_capacity(g);
    let mut rhs = Vec::with_capacity(g + 2);
    for i in 0..g {
        a_groups.push(matrix(&format!("A_{}", i + 1))?);
    }
    let a_e = matrix("A_E")?;
    let a_i = matrix("A_I")?;
    for i in 0..g {
        d_ge.push(vector(&format!("D_{}E", i + 1))?);
        d_eg.push(vector(&format!("D_E{}", i + 1))?);
    }
    let d_ei = vector("D_EI")?;
    let d_ie = vector("D_IE")?;
    for i in 0..g {
        rhs.push(vector(&format!("RHS_{}", i + 1))?);
    }
    rhs.push(vector("RHS_E")?);
    rhs.push(vector("RHS_I")?);

    BlockSystem::new(a_groups, a_e, a_i, d_ge, d_eg, d_ei, d_ie, rhs)
}
