//! Matrix Market coordinate format.

use std::io::{self, Write};

use crate::sparse::CsrMatrix;
use crate::{Error, Result};

pub fn write(w: &mut impl Write, a: &CsrMatrix, comment: &str) -> io::Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    for line in comment.lines() {
        writeln!(w, "% {line}")?;
    }
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (j, v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}

/// Largest row or column count accepted by [`read`].
pub const MAX_DIM: usize = 1 << 24;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads a real (or integer/pattern) coordinate matrix. Symmetric and
/// skew-symmetric storage is expanded; duplicate entries are summed.
pub fn read(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, banner) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let fields: Vec<String> = banner.split_whitespace().map(str::to_ascii_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix <format> <field> <symmetry>'"));
    }
    if fields[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", fields[2])));
    }
    let pattern = match fields[3].as_str() {
        "real" | "integer" | "double" => false,
        "pattern" => true,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut data = lines.filter(|(_, l)| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let (size_line, size) = data.next().ok_or_else(|| parse_err(1, "missing size line"))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(size_line, format!("bad integer '{t}'"))))
        .collect::<Result<_>>()?;
    let [nrows, ncols, nnz] = dims[..] else {
        return Err(parse_err(size_line, "size line needs rows, columns and entries"));
    };
    if nrows > MAX_DIM || ncols > MAX_DIM {
        return Err(parse_err(size_line, "matrix dimensions too large"));
    }
    if symmetry != Symmetry::General && nrows != ncols {
        return Err(parse_err(size_line, "symmetric storage needs a square matrix"));
    }

    let mut triplets = Vec::new();
    let mut seen = 0usize;
    for (line, l) in data {
        if seen == nnz {
            return Err(parse_err(line, "more entries than declared"));
        }
        let mut tok = l.split_whitespace();
        let mut index = |what: &str, bound: usize| -> Result<usize> {
            let t = tok.next().ok_or_else(|| parse_err(line, format!("missing {what}")))?;
            let v: usize = t
                .parse()
                .map_err(|_| parse_err(line, format!("bad {what} '{t}'")))?;
            if v == 0 || v > bound {
                return Err(parse_err(line, format!("{what} {v} out of range")));
            }
            Ok(v - 1)
        };
        let i = index("row", nrows)?;
        let j = index("column", ncols)?;
        let v = if pattern {
            1.0
        } else {
            let t = tok.next().ok_or_else(|| parse_err(line, "missing value"))?;
            let v: f64 = t.parse().map_err(|_| parse_err(line, format!("bad value '{t}'")))?;
            if !v.is_finite() {
                return Err(parse_err(line, "non-finite value"));
            }
            v
        };
        if tok.next().is_some() {
            return Err(parse_err(line, "trailing tokens"));
        }
        triplets.push((i, j, v));
        match symmetry {
            Symmetry::General => {}
            Symmetry::Symmetric if i != j => triplets.push((j, i, v)),
            Symmetry::SkewSymmetric if i == j => {
                return Err(parse_err(line, "diagonal entry in skew-symmetric matrix"))
            }
            Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
            Symmetry::Symmetric => {}
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(parse_err(
            text.lines().count(),
            format!("declared {nnz} entries, found {seen}"),
        ));
    }
    Ok(CsrMatrix::from_triplets(nrows, ncols, &triplets))
}
