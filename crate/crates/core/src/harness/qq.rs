//! Normal QQ-plot data.

use std::path::Path;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::harness::output::write_csv_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QqPoint {
    pub theoretical: f64,
    pub sample: f64,
}

/// Pairs the sorted samples with standard-normal quantiles at ranks `(i - 0.5) / n`.
pub fn qq_points(samples: &[f64]) -> Result<Vec<QqPoint>> {
    if samples.len() < 10 {
        return Err(Error::precondition(format!("need at least 10 samples, got {}", samples.len())));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::precondition("samples must be finite"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let normal = Normal::standard();
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, sample)| QqPoint {
            theoretical: normal.inverse_cdf((i as f64 + 0.5) / n),
            sample,
        })
        .collect())
}

pub fn export_qq_data(samples: &[f64], out: &Path) -> Result<Vec<QqPoint>> {
    let points = qq_points(samples)?;
    write_csv_atomic(out, &points)?;
    Ok(points)
}
