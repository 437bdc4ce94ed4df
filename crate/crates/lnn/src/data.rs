//! Response/regressor samples and CSV ingestion.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub sd: f64,
}

/// Per-column z-normalization record, kept so predictions can be mapped back
/// to raw units. `y` is absent when only the regressors were normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub y: Option<ColumnStats>,
    pub x: Vec<ColumnStats>,
}

/// A (y_t, x_t) sample with x stored row-major, T x d.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    y: Vec<f64>,
    x: Vec<f64>,
    d: usize,
    pub y_name: String,
    pub x_names: Vec<String>,
    pub normalization: Option<Normalization>,
    /// Rows dropped during ingestion because of missing cells.
    pub rejected_rows: usize,
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("dataset needs at least one regressor".into()));
        }
        if y.is_empty() {
            return Err(Error::Data("dataset has no rows".into()));
        }
        if x.len() != y.len() * d {
            return Err(Error::Data(format!(
                "regressor block has {} values, expected {} x {}",
                x.len(),
                y.len(),
                d
            )));
        }
        Ok(Self {
            y,
            x,
            d,
            y_name: "y".to_string(),
            x_names: (1..=d).map(|j| format!("x{j}")).collect(),
            normalization: None,
            rejected_rows: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.x[t * self.d..(t + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.x.chunks_exact(self.d)
    }

    /// Replace the response, keeping regressors and names.
    pub fn with_response(&self, y: Vec<f64>) -> Result<Self> {
        if y.len() != self.len() {
            return Err(Error::Data("response length mismatch".into()));
        }
        let mut out = self.clone();
        out.y = y;
        Ok(out)
    }
}

fn sample_stats(values: &[f64]) -> ColumnStats {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    ColumnStats { mean, sd: var.sqrt() }
}

/// Load a header-addressed CSV. Rows with empty cells in the selected columns
/// are skipped and counted; non-numeric text is a hard error with its line
/// number. With `normalize` every selected column is z-scored and the
/// transform recorded.
pub fn load_csv(
    path: &Path,
    y_column: &str,
    x_columns: &[String],
    normalize: bool,
) -> Result<Dataset> {
    load_csv_with(path, y_column, x_columns, normalize, normalize)
}

/// As [`load_csv`], but with separate normalization switches for the
/// response and the regressors (binary labels must stay in {0,1}).
pub fn load_csv_with(
    path: &Path,
    y_column: &str,
    x_columns: &[String],
    normalize_y: bool,
    normalize_x: bool,
) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let y_idx = find(y_column)?;
    let x_idx: Vec<usize> = x_columns.iter().map(|c| find(c)).collect::<Result<_>>()?;
    let d = x_idx.len();
    if d == 0 {
        return Err(Error::InvalidArgument("at least one regressor column is required".into()));
    }

    let mut y = Vec::new();
    let mut x = Vec::new();
    let mut rejected = 0usize;
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let line = row_no + 2; // header occupies line 1
        let parse = |idx: usize| -> Result<Option<f64>> {
            let raw = record.get(idx).unwrap_or("");
            if raw.is_empty() {
                return Ok(None);
            }
            raw.parse::<f64>().map(Some).map_err(|_| Error::NonNumericCell {
                column: headers[idx].to_string(),
                line,
                value: raw.to_string(),
            })
        };
        let yv = parse(y_idx)?;
        let mut xs = Vec::with_capacity(d);
        let mut missing = yv.is_none();
        for &idx in &x_idx {
            match parse(idx)? {
                Some(v) => xs.push(v),
                None => missing = true,
            }
        }
        if missing {
            rejected += 1;
            continue;
        }
        y.push(yv.unwrap());
        x.extend_from_slice(&xs);
    }
    if y.is_empty() {
        return Err(Error::Data(format!(
            "no usable rows in {} ({} rejected)",
            path.display(),
            rejected
        )));
    }

    let mut dataset = Dataset::new(y, x, d)?;
    dataset.y_name = y_column.to_string();
    dataset.x_names = x_columns.to_vec();
    dataset.rejected_rows = rejected;

    if normalize_y || normalize_x {
        if dataset.len() < 2 {
            return Err(Error::Data("normalization needs at least two rows".into()));
        }
        let t = dataset.len();
        let y_stats = normalize_y.then(|| sample_stats(&dataset.y));
        let mut x_stats = Vec::with_capacity(d);
        for j in 0..d {
            let col: Vec<f64> = (0..t).map(|i| dataset.x[i * d + j]).collect();
            x_stats.push(sample_stats(&col));
        }
        for stats in x_stats.iter().chain(y_stats.as_ref()) {
            if stats.sd == 0.0 {
                return Err(Error::Data("cannot normalize a constant column".into()));
            }
        }
        if let Some(ys) = &y_stats {
            for v in dataset.y.iter_mut() {
                *v = (*v - ys.mean) / ys.sd;
            }
        }
        if normalize_x {
            for i in 0..t {
                for j in 0..d {
                    let s = &x_stats[j];
                    dataset.x[i * d + j] = (dataset.x[i * d + j] - s.mean) / s.sd;
                }
            }
        } else {
            x_stats = vec![ColumnStats { mean: 0.0, sd: 1.0 }; d];
        }
        dataset.normalization = Some(Normalization { y: y_stats, x: x_stats });
    }
    Ok(dataset)
}

/// Load evaluation points from a CSV with the given regressor columns.
pub fn load_points_csv(path: &Path, x_columns: &[String]) -> Result<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let headers = reader.headers()?.clone();
    let x_idx: Vec<usize> = x_columns
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h == c.as_str())
                .ok_or_else(|| Error::MissingColumn(c.clone()))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (row_no, record) in reader.records().enumerate() {
        let record = record?;
        let line = row_no + 2;
        let mut point = Vec::with_capacity(x_idx.len());
        let mut missing = false;
        for &idx in &x_idx {
            let raw = record.get(idx).unwrap_or("");
            if raw.is_empty() {
                missing = true;
                break;
            }
            let v = raw.parse::<f64>().map_err(|_| Error::NonNumericCell {
                column: headers[idx].to_string(),
                line,
                value: raw.to_string(),
            })?;
            point.push(v);
        }
        if !missing {
            out.push(point);
        }
    }
    if out.is_empty() {
        return Err(Error::Data(format!("no usable points in {}", path.display())));
    }
    Ok(out)
}

/// Apply a stored regressor normalization to a raw point.
pub fn normalize_point(point: &[f64], norm: &Normalization) -> Vec<f64> {
    point
        .iter()
        .zip(&norm.x)
        .map(|(v, s)| (v - s.mean) / s.sd)
        .collect()
}

/// Map a normalized-scale response value back to raw units.
pub fn denormalize_response(value: f64, norm: &Normalization) -> f64 {
    match &norm.y {
        Some(y) => value * y.sd + y.mean,
        None => value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_selected_columns() {
        let f = write_csv("y,x1,x2\n1.0,0.1,0.2\n2.0,0.3,0.4\n3.0,0.5,0.6\n");
        let ds = load_csv(f.path(), "y", &["x1".into(), "x2".into()], false).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.y(), &[1.0, 2.0, 3.0]);
        assert_eq!(ds.row(1), &[0.3, 0.4]);
        assert_eq!(ds.rejected_rows, 0);
    }

    #[test]
    fn missing_column_is_named() {
        let f = write_csv("y,x1\n1.0,2.0\n");
        match load_csv(f.path(), "z", &["x1".into()], false) {
            Err(Error::MissingColumn(name)) => assert_eq!(name, "z"),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn non_numeric_cell_reports_line() {
        let f = write_csv("y,x1\n1.0,2.0\n1.5,abc\n");
        match load_csv(f.path(), "y", &["x1".into()], false) {
            Err(Error::NonNumericCell { column, line, .. }) => {
                assert_eq!(column, "x1");
                assert_eq!(line, 3);
            }
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn rows_with_missing_cells_are_rejected_and_counted() {
        let f = write_csv("y,x1\n1.0,2.0\n,3.0\n2.0,\n4.0,5.0\n");
        let ds = load_csv(f.path(), "y", &["x1".into()], false).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.rejected_rows, 2);
    }

    #[test]
    fn normalization_zero_mean_unit_sd() {
        let f = write_csv("y,x1\n1.0,10.0\n2.0,20.0\n3.0,30.0\n4.0,50.0\n");
        let ds = load_csv(f.path(), "y", &["x1".into()], true).unwrap();
        let t = ds.len() as f64;
        let mean_y = ds.y().iter().sum::<f64>() / t;
        assert!(mean_y.abs() < 1e-12);
        let var_y = ds.y().iter().map(|v| v * v).sum::<f64>() / (t - 1.0);
        assert!((var_y.sqrt() - 1.0).abs() < 1e-12);
        let col: Vec<f64> = (0..ds.len()).map(|i| ds.row(i)[0]).collect();
        let mean_x = col.iter().sum::<f64>() / t;
        assert!(mean_x.abs() < 1e-12);
        let var_x = col.iter().map(|v| (v - mean_x) * (v - mean_x)).sum::<f64>() / (t - 1.0);
        assert!((var_x.sqrt() - 1.0).abs() < 1e-12);

        let norm = ds.normalization.as_ref().unwrap();
        assert!((denormalize_response(ds.y()[0], norm) - 1.0).abs() < 1e-12);
        assert_eq!(normalize_point(&[10.0], norm)[0], col[0]);
    }
}
