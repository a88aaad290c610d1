//! Real-data ingestion from CSV files with a header row.

use std::path::Path;

use lowcon_core::Matrix;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub name: String,
    /// Predictors without any constant column.
    pub x_raw: Matrix,
    pub y: Option<Vec<f64>>,
    pub column_names: Vec<String>,
    /// Whether fits add an intercept column after subsampling.
    pub has_intercept: bool,
    /// Rows removed during ingestion because a selected field was missing or
    /// not numeric.
    pub dropped_rows: usize,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.x_raw.rows()
    }

    pub fn p(&self) -> usize {
        self.x_raw.cols()
    }

    /// Columns passed to the fit: the predictors, with a leading ones
    /// column when the model has an intercept.
    pub fn model_matrix(&self) -> Matrix {
        if self.has_intercept {
            self.x_raw.with_intercept()
        } else {
            self.x_raw.clone()
        }
    }
}

fn parse_field(s: &str) -> Option<f64> {
    let v: f64 = s.trim().parse().ok()?;
    v.is_finite().then_some(v)
}

/// Reads `response` (optional) and `predictors` by header name. Rows with a
/// missing or non-numeric value in any selected column are dropped; the
/// predictor order follows `predictors`.
pub fn ingest_csv(path: &Path, response: Option<&str>, predictors: &[String]) -> Result<Dataset> {
    if !path.is_file() {
        return Err(HarnessError::FileNotFound(path.to_path_buf()));
    }
    if predictors.is_empty() {
        return Err(HarnessError::config("no predictor columns given"));
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let headers = reader.headers()?.clone();
    let locate = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| HarnessError::ColumnMissing(name.to_string()))
    };
    let x_cols = predictors.iter().map(|c| locate(c)).collect::<Result<Vec<_>>>()?;
    let y_col = response.map(locate).transpose()?;

    let mut data = Vec::new();
    let mut y = Vec::new();
    let mut dropped = 0;
    let mut row = Vec::with_capacity(x_cols.len());
    for record in reader.records() {
        let record = record?;
        let field = |c: usize| record.get(c).and_then(parse_field);
        row.clear();
        row.extend(x_cols.iter().map(|&c| field(c)));
        let yv = y_col.map(field);
        if row.iter().any(Option::is_none) || yv == Some(None) {
            dropped += 1;
            continue;
        }
        data.extend(row.iter().flatten());
        if let Some(Some(v)) = yv {
            y.push(v);
        }
    }
    let n = data.len() / x_cols.len();
    if n == 0 {
        return Err(HarnessError::EmptyAfterFiltering { dropped });
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(Dataset {
        name,
        x_raw: Matrix::new(n, x_cols.len(), data)?,
        y: y_col.map(|_| y),
        column_names: predictors.to_vec(),
        has_intercept: true,
        dropped_rows: dropped,
    })
}

/// Writes the dataset with the response (if any) as the first column named
/// `response`. Values use the shortest representation that parses back to
/// the same bits.
pub fn write_csv(dataset: &Dataset, path: &Path, response: &str) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<&str> = Vec::new();
    if dataset.y.is_some() {
        header.push(response);
    }
    header.extend(dataset.column_names.iter().map(String::as_str));
    w.write_record(&header)?;
    for i in 0..dataset.n() {
        let mut rec: Vec<String> = Vec::with_capacity(header.len());
        if let Some(y) = &dataset.y {
            rec.push(y[i].to_string());
        }
        rec.extend(dataset.x_raw.row(i).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
