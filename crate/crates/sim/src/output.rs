//! Series export. Every number is written with 9 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{io_error, SimError};
use crate::scenario::Format;

/// `x` in scientific notation with 9 significant digits.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// `x` rounded to 9 significant digits, for JSON output.
pub fn round9(x: f64) -> f64 {
    sig9(x).parse().unwrap_or(x)
}

pub fn round9_all(xs: &[f64]) -> Vec<f64> {
    xs.iter().map(|&x| round9(x)).collect()
}

fn check_finite(name: &str, xs: &[f64]) -> Result<(), SimError> {
    match xs.iter().position(|x| !x.is_finite()) {
        Some(k) => Err(SimError::Numerical(format!("non-finite value in `{name}` at row {k}"))),
        None => Ok(()),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), SimError> {
    let mut f = fs::File::create(path).map_err(|e| io_error(path, e))?;
    f.write_all(bytes).map_err(|e| io_error(path, e))
}

/// Columns of equal length as `<stem>.csv` (header row, then one row per
/// sample) or `<stem>.json` (`{"columns": [...], "rows": [[...], ...]}`).
pub fn write_series(dir: &Path, stem: &str, columns: &[(&str, &[f64])], format: Format) -> Result<PathBuf, SimError> {
    let rows = columns.first().map_or(0, |c| c.1.len());
    assert!(columns.iter().all(|c| c.1.len() == rows), "ragged series");
    for (name, xs) in columns {
        check_finite(name, xs)?;
    }
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let text = match format {
        Format::Csv => {
            let mut out = columns.iter().map(|c| c.0).collect::<Vec<_>>().join(",");
            out.push('\n');
            for k in 0..rows {
                let row: Vec<String> = columns.iter().map(|c| sig9(c.1[k])).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let names: Vec<&str> = columns.iter().map(|c| c.0).collect();
            let data: Vec<Vec<f64>> = (0..rows).map(|k| columns.iter().map(|c| round9(c.1[k])).collect()).collect();
            json_text(&json!({ "columns": names, "rows": data }))
        }
    };
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}

/// Dense matrix `cells[r * cols.len() + c]`. CSV: the first row holds the
/// column coordinates after a `row\col` corner label, each later row starts
/// with its row coordinate. JSON: `{"rows": [...], "cols": [...], "values": [[...]]}`
/// with the names given.
pub fn write_matrix(
    dir: &Path,
    stem: &str,
    (row_name, row_axis): (&str, &[f64]),
    (col_name, col_axis): (&str, &[f64]),
    cells: &[f64],
    format: Format,
) -> Result<PathBuf, SimError> {
    assert_eq!(cells.len(), row_axis.len() * col_axis.len(), "matrix shape");
    check_finite(stem, cells)?;
    let path = dir.join(format!("{stem}.{}", format.extension()));
    let text = match format {
        Format::Csv => {
            let mut out = format!("{row_name}\\{col_name}");
            for &c in col_axis {
                out.push(',');
                out.push_str(&sig9(c));
            }
            out.push('\n');
            for (r, row) in row_axis.iter().zip(cells.chunks(col_axis.len().max(1))) {
                out.push_str(&sig9(*r));
                for &v in row {
                    out.push(',');
                    out.push_str(&sig9(v));
                }
                out.push('\n');
            }
            out
        }
        Format::Json => {
            let values: Vec<Vec<f64>> = cells.chunks(col_axis.len().max(1)).map(round9_all).collect();
            json_text(&json!({
                "row_axis": row_name,
                "col_axis": col_name,
                "rows": round9_all(row_axis),
                "cols": round9_all(col_axis),
                "values": values,
            }))
        }
    };
    write_bytes(&path, text.as_bytes())?;
    Ok(path)
}

pub fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf, SimError> {
    let path = dir.join(name);
    write_bytes(&path, json_text(value).as_bytes())?;
    Ok(path)
}

fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn file_sha256(path: &Path) -> Result<(String, u64), SimError> {
    let bytes = fs::read(path).map_err(|e| io_error(path, e))?;
    Ok((hex::encode(Sha256::digest(&bytes)), bytes.len() as u64))
}
