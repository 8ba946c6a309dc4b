//! Plain CSV matrices and vectors: one row per line, comma separated.

use std::path::Path;

use nalgebra::DMatrix;
use wavecs::{Error, Result};

pub fn read_matrix(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path)?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.split(',')
                .map(|v| {
                    v.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("{}: bad number '{v}'", path.display())))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::Shape(format!("{}: rows must be nonempty and of equal length", path.display())));
    }
    Ok(DMatrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

/// A vector stored either as one line or one value per line.
pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    let m = read_matrix(path).or_else(|_| {
        let text = std::fs::read_to_string(path)?;
        let v: Vec<f64> = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad number '{s}'"))))
            .collect::<Result<_>>()?;
        Ok::<_, Error>(DMatrix::from_column_slice(v.len(), 1, &v))
    })?;
    Ok(m.iter().copied().collect())
}

pub fn format_vector(v: &[f64]) -> String {
    let mut s = String::new();
    for x in v {
        s.push_str(&format!("{x}\n"));
    }
    s
}
