//! Result records: matrices as CSV/JSON, sweep rows and scenario summaries.

use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

/// Row-major CSV, one `re,im` cell pair per matrix entry.
pub fn matrix_to_csv(m: &CMatrix) -> String {
    let mut out = String::new();
    for r in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols())
            .map(|c| format!("{:e},{:e}", m[(r, c)].re, m[(r, c)].im))
            .collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<CMatrix> {
    let mut rows: Vec<Vec<Complex64>> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let nums = body
            .split(',')
            .map(|t| {
                t.trim().parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    message: format!("non-numeric cell '{t}'"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if nums.len() % 2 != 0 {
            return Err(Error::Parse {
                line,
                message: "odd number of values in a re,im row".into(),
            });
        }
        rows.push(
            nums.chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect(),
        );
        if rows.last().unwrap().len() != rows[0].len() {
            return Err(Error::Format {
                line,
                message: "ragged matrix row".into(),
            });
        }
    }
    let n_rows = rows.len();
    let n_cols = rows.first().map_or(0, Vec::len);
    Ok(CMatrix::from_fn(n_rows, n_cols, |r, c| rows[r][c]))
}

/// JSON shape `{"re": [[..]], "im": [[..]]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixRecord {
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl From<&CMatrix> for MatrixRecord {
    fn from(m: &CMatrix) -> Self {
        let part = |f: fn(&Complex64) -> f64| {
            (0..m.nrows())
                .map(|r| (0..m.ncols()).map(|c| f(&m[(r, c)])).collect())
                .collect()
        };
        Self {
            re: part(|z| z.re),
            im: part(|z| z.im),
        }
    }
}

impl MatrixRecord {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n_rows = self.re.len();
        let n_cols = self.re.first().map_or(0, Vec::len);
        let shape_ok = self.im.len() == n_rows
            && self
                .re
                .iter()
                .chain(&self.im)
                .all(|row| row.len() == n_cols);
        if !shape_ok {
            return Err(Error::invalid(
                "re and im parts must share one rectangular shape",
            ));
        }
        Ok(CMatrix::from_fn(n_rows, n_cols, |r, c| {
            Complex64::new(self.re[r][c], self.im[r][c])
        }))
    }
}

pub fn matrix_to_json(m: &CMatrix) -> Result<String> {
    Ok(serde_json::to_string_pretty(&MatrixRecord::from(m))?)
}

pub fn matrix_from_json(text: &str) -> Result<CMatrix> {
    serde_json::from_str::<MatrixRecord>(text)?.to_matrix()
}

pub const SWEEP_HEADER: &str = "spacing,h,spread_deg,snr_db,diversity,capacity,ci95,seed";

/// One sweep point. Capacity fields are empty when not computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub spacing: f64,
    pub h: f64,
    pub spread_deg: f64,
    pub snr_db: Option<f64>,
    pub diversity: f64,
    pub capacity: Option<f64>,
    pub ci95: Option<f64>,
    pub seed: Option<u64>,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SWEEP_HEADER}");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.spacing,
            r.h,
            r.spread_deg,
            opt(&r.snr_db),
            r.diversity,
            opt(&r.capacity),
            opt(&r.ci95),
            opt(&r.seed)
        );
    }
    out
}

pub const SUMMARY_HEADER: &str =
    "scenario,variant,diversity,capacity,diversity_increase_pct,capacity_increase_pct";

/// One row of a baseline-relative comparison table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub variant: String,
    pub diversity: f64,
    pub capacity: f64,
    pub diversity_increase_pct: f64,
    pub capacity_increase_pct: f64,
}

pub fn summary_to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{SUMMARY_HEADER}");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.scenario,
            r.variant,
            r.diversity,
            r.capacity,
            r.diversity_increase_pct,
            r.capacity_increase_pct
        );
    }
    out
}

/// 100·(value/baseline − 1).
pub fn percent_increase(value: f64, baseline: f64) -> f64 {
    100.0 * (value / baseline - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CMatrix {
        CMatrix::from_fn(2, 3, |r, c| {
            Complex64::new(r as f64 + 0.1, -(c as f64) / 3.0)
        })
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = sample();
        assert_eq!(matrix_from_csv(&matrix_to_csv(&m)).unwrap(), m);
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = sample();
        assert_eq!(matrix_from_json(&matrix_to_json(&m).unwrap()).unwrap(), m);
    }

    #[test]
    fn sweep_row_layout() {
        let row = SweepRow {
            spacing: 0.25,
            h: 0.5,
            spread_deg: 90.0,
            snr_db: None,
            diversity: 12.5,
            capacity: None,
            ci95: None,
            seed: None,
        };
        let csv = sweep_to_csv(&[row]);
        assert_eq!(csv.lines().nth(1).unwrap(), "0.25,0.5,90,,12.5,,,");
    }

    #[test]
    fn percent() {
        assert!((percent_increase(1.27, 1.0) - 27.0).abs() < 1e-12);
        assert_eq!(percent_increase(2.0, 2.0), 0.0);
    }
}
