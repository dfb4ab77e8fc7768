//! CSV dataset I/O: one sample per row, optional final label column,
//! optional header line.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{InvMlError, Result};
use crate::matrix::Matrix;

use super::Dataset;

/// Loads a CSV file. A first line that fails to parse as numbers is
/// treated as a header and skipped. With `has_labels`, the final column is
/// read as integer labels.
pub fn load_csv(path: &Path, has_labels: bool) -> Result<Dataset> {
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let mut values = match parsed {
            Ok(v) => v,
            Err(_) if lineno == 0 => continue, // header
            Err(e) => {
                return Err(InvMlError::InvalidArgument(format!(
                    "{}:{}: {e}",
                    path.display(),
                    lineno + 1
                )))
            }
        };
        if has_labels {
            let l = values.pop().ok_or_else(|| {
                InvMlError::InvalidArgument(format!("{}:{}: empty row", path.display(), lineno + 1))
            })?;
            labels.push(l as usize);
        }
        rows.push(values);
    }
    let x = Matrix::from_rows(&rows)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("csv");
    Dataset::new(x, if has_labels { Some(labels) } else { None }, stem)
}

/// Writes a dataset as CSV; labels, when present, become the final column.
pub fn save_csv(path: &Path, ds: &Dataset) -> Result<()> {
    let mut f = fs::File::create(path)?;
    for i in 0..ds.len() {
        let mut line = ds
            .x
            .row(i)
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect::<Vec<_>>()
            .join(",");
        if let Some(l) = &ds.labels {
            line.push(',');
            line.push_str(&l[i].to_string());
        }
        writeln!(f, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn roundtrip_with_labels() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let x = Matrix::from_fn(5, 3, |i, j| i as f64 * 0.25 - j as f64);
        let ds = Dataset::new(x, Some(vec![0, 1, 2, 1, 0]), "t").unwrap();
        save_csv(&path, &ds).unwrap();
        let back = load_csv(&path, true).unwrap();
        assert_eq!(back.x, ds.x);
        assert_eq!(back.labels, ds.labels);
    }

    #[test]
    fn header_skipped() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("h.csv");
        fs::write(&path, "a,b,label\n1.0,2.0,0\n3.0,4.0,1\n").unwrap();
        let ds = load_csv(&path, true).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.labels.as_deref(), Some(&[0usize, 1][..]));
    }

    #[test]
    fn bad_value_mid_file_rejected() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "1.0,2.0\nx,4.0\n").unwrap();
        assert!(load_csv(&path, false).is_err());
    }
}
