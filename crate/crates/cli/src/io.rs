//! Plain-text matrix files.
//!
//! The first line holds `rows cols`; each of the next `rows` lines holds
//! `cols` whitespace-separated decimal values. Blank lines are ignored.
//! Values are written with 17 significant digits so a save/load round trip
//! is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use srht_matmul::DenseMatrix;

use crate::error::{CliError, Result};

/// 17 significant digits in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn parse_matrix(text: &str, path: &Path) -> Result<DenseMatrix> {
    let err = |line: usize, msg: String| CliError::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());

    let (hline, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(err(hline, format!("expected `rows cols`, got `{header}`")));
    }
    let parse_dim = |s: &str| {
        s.parse::<usize>()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| err(hline, format!("invalid dimension `{s}`")))
    };
    let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);

    let mut data = Vec::with_capacity(rows * cols);
    let mut seen_rows = 0;
    for (lineno, line) in lines {
        if seen_rows == rows {
            return Err(err(lineno, format!("more than {rows} data rows")));
        }
        let before = data.len();
        for tok in line.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| err(lineno, format!("invalid number `{tok}`")))?;
            if !v.is_finite() {
                return Err(err(lineno, format!("non-finite value `{tok}`")));
            }
            data.push(v);
        }
        let got = data.len() - before;
        if got != cols {
            return Err(err(lineno, format!("expected {cols} values, got {got}")));
        }
        seen_rows += 1;
    }
    if seen_rows != rows {
        let last = text.lines().count().max(1);
        return Err(err(last, format!("expected {rows} data rows, got {seen_rows}")));
    }
    Ok(DenseMatrix::new(rows, cols, data)?)
}

pub fn load_matrix(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_matrix(&text, path)
}

pub fn format_matrix(m: &DenseMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&x| fmt_f64(x)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn save_matrix(m: &DenseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_matrix(m)).map_err(|e| CliError::io(path, e))
}
