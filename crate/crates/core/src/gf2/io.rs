//! Sparse-matrix text format: a `rows cols` header followed by one `r c` line
//! per nonzero, row-major.

use std::io::{BufRead, Write};

use super::BinaryMatrix;
use crate::error::{Error, Result};

pub fn write_sparse_matrix<W: Write>(m: &BinaryMatrix, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{} {}", m.rows(), m.cols())?;
    for (r, c) in m.entries() {
        writeln!(out, "{r} {c}")?;
    }
    Ok(())
}

/// Parses the sparse text format. `name` is only used in error messages.
pub fn read_sparse_matrix<R: BufRead>(input: R, name: &str) -> Result<BinaryMatrix> {
    let mut header = None;
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(name, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::parse(name, lineno, "expected two integers"));
        };
        let a: usize = a
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad integer '{a}'")))?;
        let b: usize = b
            .parse()
            .map_err(|_| Error::parse(name, lineno, format!("bad integer '{b}'")))?;
        match header {
            None => header = Some((a, b)),
            Some((rows, cols)) => {
                if a >= rows || b >= cols {
                    return Err(Error::parse(
                        name,
                        lineno,
                        format!("entry ({a}, {b}) outside {rows}x{cols}"),
                    ));
                }
                if !seen.insert((a, b)) {
                    return Err(Error::parse(name, lineno, format!("duplicate entry ({a}, {b})")));
                }
                entries.push((a, b));
            }
        }
    }
    let (rows, cols) = header.ok_or_else(|| Error::parse(name, 1, "missing 'rows cols' header"))?;
    BinaryMatrix::from_entries(rows, cols, entries)
}
