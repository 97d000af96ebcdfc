//! Plain-text file formats: CSV matrices at 17 significant digits (so every
//! f64 round-trips bit-exactly) and single-column target files.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{CliError, Result};

/// 17 significant digits; parses back to the identical f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write a matrix as comma-separated rows, optionally preceded by a header
/// line starting with '#'.
pub fn write_matrix_csv(path: &Path, m: &Array2<f64>, header: Option<&str>) -> Result<()> {
    let mut out = String::new();
    if let Some(h) = header {
        out.push_str(h);
        out.push('\n');
    }
    for row in m.rows() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
            first = false;
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

/// Read a CSV matrix, skipping '#' header lines.
pub fn read_matrix_csv(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|f| f.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| {
            CliError::Usage(format!("{}:{}: bad number: {e}", path.display(), lineno + 1))
        })?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!("{}: empty matrix", path.display())));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(CliError::Usage(format!("{}: ragged rows", path.display())));
    }
    let n = rows.len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, cols), flat)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// One value per line, shortest round-trip representation.
pub fn write_targets(path: &Path, targets: &[f64]) -> Result<()> {
    let mut out = String::new();
    for t in targets {
        out.push_str(&format!("{t}"));
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_targets(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("{}: bad target: {e}", path.display())))
        })
        .collect()
}

/// Write via a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let tmp = dir.join(format!(
        ".tmp.{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out")
    ));
    {
        let mut f = fs::File::create(&tmp).map_err(CliError::io(&tmp))?;
        f.write_all(bytes).map_err(CliError::io(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(CliError::io(path))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::arr2;

    #[test]
    fn f64_round_trips() {
        for &v in &[0.1, 1.0 / 3.0, 2.5e-8, 123456.789, 5e-324, 0.0] {
            let s = fmt_f64(v);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn matrix_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = arr2(&[[0.1, 0.2], [1.0 / 7.0, 5e-300]]);
        write_matrix_csv(&path, &m, Some("# D=2 config_hash=abc")).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn targets_round_trip_integers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_targets(&path, &[5.0, 1.0, 10.0]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "5\n1\n10\n");
        assert_eq!(read_targets(&path).unwrap(), vec![5.0, 1.0, 10.0]);
    }
}
