//! Log-log least-squares rate fits.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::metrics::quantile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// OLS of `ln value` on `ln k`.
pub fn fit_rate_slope(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 4 {
        return Err(Error::precondition(format!("need at least 4 points, got {}", points.len())));
    }
    if let Some(&(k, v)) = points.iter().find(|(k, v)| !(*k > 0.0 && *v > 0.0)) {
        return Err(Error::precondition(format!("points must be positive, got ({k}, {v})")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::precondition("abscissae must not all coincide"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (sse / (n - 2.0) / sxx).sqrt();
    Ok(RateFit {
        slope,
        stderr,
        intercept,
        points: points.len(),
    })
}

/// Reads a per-method output CSV, takes the median of `column` over
/// replications at each `oracle_calls` value `>= min_calls`, and fits the slope.
pub fn fit_rate_from_csv(path: &Path, column: &str, min_calls: usize) -> Result<RateFit> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::precondition(format!("{}: no column '{name}'", path.display())))
    };
    let calls_idx = find("oracle_calls")?;
    let value_idx = find(column)?;
    let mut groups: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = i + 2;
        let calls: usize = record[calls_idx].trim().parse().map_err(|_| Error::Parse {
            path: path.into(),
            row,
            column: calls_idx + 1,
            message: format!("not an integer: '{}'", &record[calls_idx]),
        })?;
        let value: f64 = record[value_idx].trim().parse().map_err(|_| Error::Parse {
            path: path.into(),
            row,
            column: value_idx + 1,
            message: format!("not a number: '{}'", &record[value_idx]),
        })?;
        if calls >= min_calls.max(1) {
            groups.entry(calls).or_default().push(value);
        }
    }
    let points: Vec<(f64, f64)> = groups
        .into_iter()
        .map(|(calls, values)| (calls as f64, quantile(&values, 0.5)))
        .collect();
    fit_rate_slope(&points)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::io(path, std::io::Error::other(e.to_string()))
}
