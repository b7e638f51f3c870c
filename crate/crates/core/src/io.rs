//! CSV input and output for sequences and regression datasets.

use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{domain, Error, Result};

/// Formats a float with 17 significant digits so that it round-trips exactly.
/// Infinities are written as `inf` / `-inf`.
pub fn format_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = cell
        .trim()
        .parse()
        .map_err(|_| Error::Domain(format!("row {row}, column '{column}': cannot parse '{cell}' as a number")))?;
    if !v.is_finite() {
        return domain(format!("row {row}, column '{column}': value must be finite"));
    }
    Ok(v)
}

/// Reads a one-column CSV with header `x`.
pub fn read_univariate_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.len() != 1 || headers[0].trim() != "x" {
        return domain(format!(
            "expected a single column with header 'x', found {:?}",
            headers.iter().collect::<Vec<_>>()
        ));
    }
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        out.push(parse_cell(&rec?[0], i + 1, "x")?);
    }
    if out.is_empty() {
        return domain("sequence file has no rows");
    }
    Ok(out)
}

pub fn write_univariate_csv(path: impl AsRef<Path>, x: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x"])?;
    for v in x {
        w.write_record([format_f64(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// Raw regression data: covariate names, covariates (n×p), and `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct RawRegressionData {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
}

/// Reads a CSV with one column per covariate plus a column named `y`.
pub fn read_regression_csv(path: impl AsRef<Path>) -> Result<RawRegressionData> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let y_col = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::Domain("regression file needs a column named 'y'".into()))?;
    let names: Vec<String> = headers.iter().enumerate().filter(|(i, _)| *i != y_col).map(|(_, h)| h.clone()).collect();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        for (j, cell) in rec.iter().enumerate() {
            let v = parse_cell(cell, i + 1, &headers[j])?;
            if j == y_col {
                ys.push(v);
            } else {
                xs.push(v);
            }
        }
    }
    let n = ys.len();
    if n == 0 {
        return domain("regression file has no rows");
    }
    let p = names.len();
    Ok(RawRegressionData { names, x: DMatrix::from_row_slice(n, p, &xs), y: DVector::from_vec(ys) })
}

pub fn write_regression_csv(
    path: impl AsRef<Path>,
    names: &[String],
    x: &DMatrix<f64>,
    y: &DVector<f64>,
) -> Result<()> {
    if names.len() != x.ncols() {
        return Err(Error::Shape { expected: x.ncols(), found: names.len() });
    }
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    header.push("y");
    w.write_record(&header)?;
    for i in 0..x.nrows() {
        let mut row: Vec<String> = (0..x.ncols()).map(|j| format_f64(x[(i, j)])).collect();
        row.push(format_f64(y[i]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
