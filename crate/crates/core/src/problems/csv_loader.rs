//! Numeric CSV ingestion for robust regression.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::robust_regression::RobustRegression;

/// Which column holds the regression target.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum TargetColumn {
    /// Zero-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
    #[default]
    Last,
}

impl FromStr for TargetColumn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("last") {
            Ok(TargetColumn::Last)
        } else if let Ok(i) = s.parse::<usize>() {
            Ok(TargetColumn::Index(i))
        } else {
            Ok(TargetColumn::Name(s.to_string()))
        }
    }
}

impl fmt::Display for TargetColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetColumn::Index(i) => write!(f, "{i}"),
            TargetColumn::Name(n) => f.write_str(n),
            TargetColumn::Last => f.write_str("last"),
        }
    }
}

/// Echo of what was loaded.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub path: String,
    /// Zero-based index of the target column.
    pub target_column: usize,
    pub n_rows: usize,
    pub n_cols: usize,
}

#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub problem: RobustRegression,
    pub manifest: DatasetManifest,
    pub header: Option<Vec<String>>,
}

/// Maps a column to `[0, 1]` by its min and max; constant columns become 0.
pub fn min_max_rescale(column: &mut [f64]) {
    let (lo, hi) = column
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let range = hi - lo;
    for v in column.iter_mut() {
        *v = if range > 0.0 { ((*v - lo) / range).clamp(0.0, 1.0) } else { 0.0 };
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads a fully numeric CSV. A first row with any non-numeric cell is taken
/// as a header. Every column is min-max rescaled; `batch_size` is clamped to
/// the number of data rows.
pub fn load_csv_dataset(path: &Path, target: &TargetColumn, batch_size: usize) -> Result<LoadedDataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(file);
    let parse_err = |row: usize, column: usize, message: String| Error::Parse {
        path: PathBuf::from(path),
        row,
        column,
        message,
    };

    let mut header = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut width = 0;
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => parse_err(row, 1, e.to_string()),
        })?;
        if idx == 0 {
            width = record.len();
            columns = vec![Vec::new(); width];
            if record.iter().any(|c| parse_cell(c).is_none()) {
                header = Some(record.iter().map(|c| c.trim().to_string()).collect());
                continue;
            }
        }
        if record.len() != width {
            return Err(parse_err(
                row,
                record.len().min(width) + 1,
                format!("expected {width} fields, found {}", record.len()),
            ));
        }
        for (j, cell) in record.iter().enumerate() {
            let v = parse_cell(cell).ok_or_else(|| parse_err(row, j + 1, format!("not a number: '{cell}'")))?;
            columns[j].push(v);
        }
    }

    let n_rows = columns.first().map(Vec::len).unwrap_or(0);
    if n_rows == 0 {
        return Err(Error::precondition(format!("{}: no data rows", path.display())));
    }
    if width < 2 {
        return Err(Error::precondition(format!(
            "{}: need at least one feature column and a target column",
            path.display()
        )));
    }
    let target_idx = match target {
        TargetColumn::Last => width - 1,
        TargetColumn::Index(i) if *i < width => *i,
        TargetColumn::Index(i) => {
            return Err(Error::precondition(format!("target column {i} out of range (width {width})")))
        }
        TargetColumn::Name(name) => header
            .as_ref()
            .and_then(|h: &Vec<String>| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::precondition(format!("no column named '{name}'")))?,
    };

    for col in columns.iter_mut() {
        min_max_rescale(col);
    }
    let targets = columns.remove(target_idx);
    let rows: Vec<Vec<f64>> = (0..n_rows).map(|i| columns.iter().map(|c| c[i]).collect()).collect();
    let problem = RobustRegression::new(rows, targets, batch_size)?;
    Ok(LoadedDataset {
        problem,
        manifest: DatasetManifest {
            path: path.display().to_string(),
            target_column: target_idx,
            n_rows,
            n_cols: width,
        },
        header,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescale_examples() {
        let mut c = vec![2.0, 4.0, 6.0];
        min_max_rescale(&mut c);
        assert_eq!(c, vec![0.0, 0.5, 1.0]);
        let mut c = vec![5.0, 5.0];
        min_max_rescale(&mut c);
        assert_eq!(c, vec![0.0, 0.0]);
    }

    #[test]
    fn affine_invariance() {
        let base = vec![1.0, -3.0, 2.5, 0.25, 7.0];
        let mut a = base.clone();
        let mut b: Vec<f64> = base.iter().map(|v| 3.5 * v - 11.0).collect();
        min_max_rescale(&mut a);
        min_max_rescale(&mut b);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn target_column_parsing() {
        assert_eq!("3".parse::<TargetColumn>().unwrap(), TargetColumn::Index(3));
        assert_eq!("".parse::<TargetColumn>().unwrap(), TargetColumn::Last);
        assert_eq!("price".parse::<TargetColumn>().unwrap(), TargetColumn::Name("price".into()));
    }
}
