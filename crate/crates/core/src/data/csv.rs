use std::path::Path;

use super::{Dataset, Targets, Task};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Reads a header-first numeric CSV. `target_column` names the target;
/// every other column becomes a feature in file order.
pub fn load_csv(path: impl AsRef<Path>, target_column: &str, task: Task) -> Result<Dataset> {
    let path = path.as_ref();
    let err = |line: u64, reason: String| Error::Csv {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut reader = ::csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| err(0, e.to_string()))?;
    let headers = reader.headers().map_err(|e| err(1, e.to_string()))?.clone();
    let target = headers
        .iter()
        .position(|h| h.trim() == target_column)
        .ok_or_else(|| err(1, format!("no column named `{target_column}`")))?;
    let width = headers.len();

    let mut features = Vec::new();
    let mut values = Vec::new();
    let mut record = ::csv::StringRecord::new();
    loop {
        match reader.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                return Err(err(line, e.to_string()));
            }
        }
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(err(line, format!("expected {width} fields, found {}", record.len())));
        }
        for (c, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| err(line, format!("column {} is not numeric: `{cell}`", c + 1)))?;
            if c == target {
                values.push(v);
            } else {
                features.push(v);
            }
        }
    }
    if values.is_empty() {
        return Err(err(1, "no data rows".into()));
    }
    let rows = values.len();
    let features = Matrix::from_vec(rows, width - 1, features)?;
    let targets = match task {
        Task::Regression => Targets::Values(values),
        Task::Classification => {
            let mut labels = Vec::with_capacity(rows);
            for (i, &v) in values.iter().enumerate() {
                if v < 0.0 || v.fract() != 0.0 {
                    // header is line 1, first record line 2
                    return Err(err(
                        i as u64 + 2,
                        format!("class label {v} is not a non-negative integer"),
                    ));
                }
                labels.push(v as usize);
            }
            let classes = labels.iter().max().map_or(0, |m| m + 1).max(2);
            Targets::Classes { labels, classes }
        }
    };
    Dataset::new(features, targets)
}

/// Writes features as `x0..x{n-1}` followed by a `target` column.
pub fn write_csv(path: impl AsRef<Path>, ds: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let to_err = |e: ::csv::Error| Error::Csv {
        path: path.to_path_buf(),
        line: 0,
        reason: e.to_string(),
    };
    let mut w = ::csv::Writer::from_path(path).map_err(to_err)?;
    let mut header: Vec<String> = (0..ds.num_features()).map(|i| format!("x{i}")).collect();
    header.push("target".into());
    w.write_record(&header).map_err(to_err)?;
    let mut row = Vec::with_capacity(header.len());
    for r in 0..ds.len() {
        row.clear();
        // `{}` on f64 prints the shortest string that parses back exactly
        row.extend(ds.features.row(r).iter().map(|v| v.to_string()));
        row.push(match &ds.targets {
            Targets::Classes { labels, .. } => labels[r].to_string(),
            Targets::Values(v) => v[r].to_string(),
        });
        w.write_record(&row).map_err(to_err)?;
    }
    w.flush()?;
    Ok(())
}
