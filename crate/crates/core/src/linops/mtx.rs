//! Matrix Market coordinate format, real or complex fields.

use std::io::Write;
use std::path::Path;

use super::CsrMatrix;
use crate::{Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MtxSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix_market(&text)
}

/// Parses a square coordinate matrix. Symmetric, skew-symmetric and Hermitian
/// headers are expanded to full storage.
pub fn parse_matrix_market(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty file"))?;
    let toks: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(perr(hline, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if toks[2] != "coordinate" {
        return Err(Error::Unsupported(format!("format '{}'", toks[2])));
    }
    let complex = match toks[3].as_str() {
        "real" | "integer" => false,
        "complex" => true,
        other => return Err(Error::Unsupported(format!("field '{other}'"))),
    };
    let symmetry = match toks[4].as_str() {
        "general" => MtxSymmetry::General,
        "symmetric" => MtxSymmetry::Symmetric,
        "skew-symmetric" => MtxSymmetry::SkewSymmetric,
        "hermitian" => MtxSymmetry::Hermitian,
        other => return Err(Error::Unsupported(format!("symmetry '{other}'"))),
    };

    let mut body = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (sline, size) = body.next().ok_or_else(|| perr(hline, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|s| s.parse::<usize>().map_err(|e| perr(sline, e.to_string())))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(perr(sline, "size line must hold rows, cols, nnz"));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    if rows != cols {
        return Err(perr(sline, format!("matrix must be square, got {rows}x{cols}")));
    }

    let mut trips = Vec::with_capacity(2 * nnz);
    let mut seen = 0usize;
    for (ln, l) in body {
        let f: Vec<&str> = l.split_whitespace().collect();
        let want = if complex { 4 } else { 3 };
        if f.len() != want {
            return Err(perr(ln, format!("expected {want} fields, got {}", f.len())));
        }
        let idx = |s: &str| -> Result<usize> {
            let k: usize = s.parse().map_err(|_| perr(ln, format!("bad index '{s}'")))?;
            if k == 0 || k > rows {
                return Err(perr(ln, format!("index {k} out of range 1..={rows}")));
            }
            Ok(k - 1)
        };
        let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| perr(ln, format!("bad value '{s}'"))) };
        let (i, j) = (idx(f[0])?, idx(f[1])?);
        let v = if complex { C64::new(num(f[2])?, num(f[3])?) } else { C64::new(num(f[2])?, 0.0) };
        trips.push((i, j, v));
        if i != j {
            match symmetry {
                MtxSymmetry::General => {}
                MtxSymmetry::Symmetric => trips.push((j, i, v)),
                MtxSymmetry::SkewSymmetric => trips.push((j, i, -v)),
                MtxSymmetry::Hermitian => trips.push((j, i, v.conj())),
            }
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(perr(sline, format!("header declares {nnz} entries, found {seen}")));
    }
    CsrMatrix::from_triplets(rows, &trips)
}

/// Writes full (general) complex coordinate storage with round-trip exact floats.
pub fn write_matrix_market(m: &CsrMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix coordinate complex general")?;
    writeln!(f, "{} {} {}", m.n(), m.n(), m.nnz())?;
    for (i, j, v) in m.triplets() {
        writeln!(f, "{} {} {:?} {:?}", i + 1, j + 1, v.re, v.im)?;
    }
    f.flush()?;
    Ok(())
}
