//! CSV and sidecar helpers. Floats are written with 17 significant digits so
//! every `f64` round-trips exactly.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{Parity, RadialField, RadialGrid};

/// `{:.16e}` formatting: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Render a CSV with a header row.
pub fn csv_string(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Field snapshot with header `r,value`.
pub fn field_csv(f: &RadialField) -> String {
    let grid = f.grid();
    let rows: Vec<Vec<f64>> = f
        .values()
        .iter()
        .enumerate()
        .map(|(i, &x)| vec![grid.r(i), x])
        .collect();
    csv_string(&["r", "value"], &rows)
}

pub fn write_field_csv(path: &Path, f: &RadialField) -> Result<()> {
    write_text(path, &field_csv(f))
}

/// Parse numeric CSV text into its header and rows.
pub fn parse_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| Error::Config("empty CSV".into()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        let row = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("row {}: bad number `{}`", n + 1, s.trim())))
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != header.len() {
            return Err(Error::Config(format!(
                "row {} has {} columns, header has {}",
                n + 1,
                row.len(),
                header.len()
            )));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// Read an `r,value` snapshot back onto `grid`, checking the node positions.
pub fn read_field_csv(path: &Path, grid: RadialGrid, parity: Parity) -> Result<RadialField> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let (header, rows) = parse_csv(&text)?;
    if header != ["r", "value"] {
        return Err(Error::Config(format!("unexpected header {header:?}")));
    }
    if rows.len() != grid.n_nodes() {
        return Err(Error::GridMismatch);
    }
    for (i, row) in rows.iter().enumerate() {
        if (row[0] - grid.r(i)).abs() > 1e-12 * grid.r_max() {
            return Err(Error::GridMismatch);
        }
    }
    RadialField::new(grid, rows.into_iter().map(|r| r[1]).collect(), parity)
}

/// Hex SHA-256 of `text`.
pub fn sha256_hex(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// `key = value` sidecar, one pair per line, in the given order.
pub fn meta_string(pairs: &[(&str, String)]) -> String {
    pairs.iter().fold(String::new(), |mut s, (k, v)| {
        let _ = writeln!(s, "{k} = {v}");
        s
    })
}
