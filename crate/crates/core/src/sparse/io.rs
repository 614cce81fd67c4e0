//! Matrix Market ("coordinate real general", 1-based) reader/writer and a
//! plain-text vector format with one value per line.
//!
//! Values are written with 17 significant digits so that every `f64` round
//! trips bit-exactly through the textual form.

use super::{CsrMatrix, DenseVector};
use crate::error::{Error, Result};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

const MM_HEADER: &str = "%%MatrixMarket matrix coordinate real general";

pub fn write_matrix_market<W: Write>(m: &CsrMatrix, w: &mut W) -> Result<()> {
    writeln!(w, "{MM_HEADER}")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for i in 0..m.n_rows() {
        for (j, v) in m.row(i) {
            writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

pub fn write_matrix_market_file<P: AsRef<Path>>(m: &CsrMatrix, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_matrix_market(m, &mut w)
}

pub fn read_matrix_market<R: BufRead>(r: R) -> Result<CsrMatrix> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix market stream".into()))??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5
        || fields[0] != "%%MatrixMarket"
        || fields[1] != "matrix"
        || fields[2] != "coordinate"
        || fields[3] != "real"
        || fields[4] != "general"
    {
        return Err(Error::Parse(format!(
            "unsupported matrix market header: {header}"
        )));
    }
    let mut dims: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        match dims {
            None => {
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("bad size line: {t}")));
                }
                let nr = parts[0]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad row count: {}", parts[0])))?;
                let nc = parts[1]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad column count: {}", parts[1])))?;
                let nnz = parts[2]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad nnz: {}", parts[2])))?;
                dims = Some((nr, nc, nnz));
                triplets.reserve(nnz);
            }
            Some((nr, nc, _)) => {
                if parts.len() != 3 {
                    return Err(Error::Parse(format!("bad entry line: {t}")));
                }
                let i = parts[0]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad row index: {}", parts[0])))?;
                let j = parts[1]
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad column index: {}", parts[1])))?;
                let v = parts[2]
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value: {}", parts[2])))?;
                if i == 0 || j == 0 || i > nr || j > nc {
                    return Err(Error::Parse(format!(
                        "index ({i},{j}) outside 1..={nr} x 1..={nc}"
                    )));
                }
                if !v.is_finite() {
                    return Err(Error::Parse(format!("non-finite value {v}")));
                }
                triplets.push((i - 1, j - 1, v));
            }
        }
    }
    let (nr, nc, nnz) = dims.ok_or_else(|| Error::Parse("missing size line".into()))?;
    if triplets.len() != nnz {
        return Err(Error::Parse(format!(
            "expected {nnz} entries, found {}",
            triplets.len()
        )));
    }
    CsrMatrix::from_triplets(nr, nc, &triplets)
}

pub fn read_matrix_market_file<P: AsRef<Path>>(path: P) -> Result<CsrMatrix> {
    read_matrix_market(BufReader::new(File::open(path)?))
}

pub fn write_vector<W: Write>(v: &DenseVector, w: &mut W) -> Result<()> {
    for x in v.iter() {
        writeln!(w, "{x:.16e}")?;
    }
    Ok(())
}

pub fn write_vector_file<P: AsRef<Path>>(v: &DenseVector, path: P) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_vector(v, &mut w)
}

pub fn read_vector<R: BufRead>(r: R) -> Result<DenseVector> {
    let mut values = Vec::new();
    for line in r.lines() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v = t
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad vector value: {t}")))?;
        values.push(v);
    }
    DenseVector::new(values)
}

pub fn read_vector_file<P: AsRef<Path>>(path: P) -> Result<DenseVector> {
    read_vector(BufReader::new(File::open(path)?))
}
