//! Parameter sweeps. Grid points are independent and evaluated in parallel;
//! rows come back in grid order.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::einstein::enumerate_einstein;
use crate::error::{Error, Result};
use crate::gray::{eps_s, eta_estimate_with};
use crate::kahler::{kahler_boundary_residuals, KahlerSpec};
use crate::params::Sign;

/// One record per grid point, plus summary values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub kind: String,
    /// Which columns are grid axes.
    pub axes: Vec<String>,
    pub columns: Vec<String>,
    /// Undefined entries (`NaN`) are written as `null`.
    #[serde(deserialize_with = "de_rows")]
    pub rows: Vec<Vec<f64>>,
    pub summary: BTreeMap<String, f64>,
}

fn de_rows<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
    let rows: Vec<Vec<Option<f64>>> = Deserialize::deserialize(d)?;
    Ok(rows
        .into_iter()
        .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
        .collect())
}

impl SweepResult {
    fn new(kind: &str, axes: &[&str], columns: &[&str], rows: Vec<Vec<f64>>) -> Self {
        SweepResult {
            kind: kind.into(),
            axes: axes.iter().map(|s| s.to_string()).collect(),
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows,
            summary: BTreeMap::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Header row and one line per record, shortest round-trip decimals.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv_rows(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header = r.headers()?.iter().map(String::from).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let row = rec
                .iter()
                .map(|v| v.parse::<f64>().map_err(|e| Error::Format(format!("bad CSV value '{v}': {e}"))))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Ok((header, rows))
    }
}

/// `(genus, count)` with `count = max(0, 2g − 3)` for `g ≥ 2`.
pub fn einstein_count(genera: &[u32]) -> SweepResult {
    let rows = genera
        .par_iter()
        .map(|&g| vec![g as f64, enumerate_einstein(g).len() as f64])
        .collect();
    SweepResult::new("einstein-count", &["genus"], &["genus", "count"], rows)
}

/// Bracketed threshold of the asymmetric family.
pub fn eta(lower: f64, upper: f64, tol: f64) -> Result<SweepResult> {
    let est = eta_estimate_with(lower, upper, tol)?;
    let mut r = SweepResult::new(
        "eta",
        &[],
        &["lower", "upper", "value", "iterations"],
        vec![vec![est.lower, est.upper, est.value, est.iterations as f64]],
    );
    r.summary.insert("width".into(), est.upper - est.lower);
    Ok(r)
}

/// The curve `s ↦ ε_s`.
pub fn eps_s_curve(s_values: &[f64], eps: Sign) -> SweepResult {
    let rows = s_values.par_iter().map(|&s| vec![s, eps_s(s, eps)]).collect();
    let mut r = SweepResult::new("eps-s", &["s"], &["s", "eps_s"], rows);
    r.summary.insert("eps".into(), eps.value());
    r
}

/// Feasibility of the Kähler family over an `(s, D)` grid.
pub fn kahler_window(s_values: &[f64], d_values: &[f64]) -> SweepResult {
    let grid: Vec<(f64, f64)> = s_values
        .iter()
        .flat_map(|&s| d_values.iter().map(move |&d| (s, d)))
        .collect();
    let rows: Vec<Vec<f64>> = grid
        .par_iter()
        .map(|&(s, d)| match KahlerSpec::new(s, d) {
            Ok(spec) => {
                let ok = kahler_boundary_residuals(&spec).passed();
                vec![s, d, if ok { 1.0 } else { 0.0 }, spec.y, spec.x]
            }
            Err(_) => vec![s, d, 0.0, f64::NAN, f64::NAN],
        })
        .collect();
    let feasible = rows.iter().filter(|r| r[2] == 1.0).count();
    let mut r = SweepResult::new("kahler-window", &["s", "d"], &["s", "d", "feasible", "y", "x"], rows);
    r.summary.insert("feasible".into(), feasible as f64);
    r
}

/// Evenly spaced values `lo, …, hi` (inclusive).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn einstein_counts() {
        let r = einstein_count(&[2, 3, 4, 5, 6]);
        assert_eq!(r.column("count").unwrap(), vec![1.0, 3.0, 5.0, 7.0, 9.0]);
    }

    #[test]
    fn eps_s_saturates() {
        let r = eps_s_curve(&[0.5, 1.0, 1.5, 2.0, 3.0], Sign::Minus);
        let v = r.column("eps_s").unwrap();
        assert_eq!(&v[3..], &[1.0, 1.0]);
        assert!(v[..3].iter().all(|&e| e < 1.0));
    }

    #[test]
    fn kahler_window_edges() {
        let r = kahler_window(&[0.5, 1.9, 2.0, 2.5], &[1.0, 4.0]);
        assert_eq!(r.column("feasible").unwrap(), vec![1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(r.summary["feasible"], 4.0);
    }

    #[test]
    fn csv_and_json_agree() {
        let r = kahler_window(&linspace(0.1, 2.2, 5), &[2.0]);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let (header, rows) = SweepResult::read_csv_rows(std::str::from_utf8(&buf).unwrap()).unwrap();
        let back: SweepResult = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(header, back.columns);
        assert_eq!(rows.len(), back.rows.len());
        for ((a, b), c) in rows.iter().zip(&r.rows).zip(&back.rows) {
            for ((x, y), z) in a.iter().zip(b).zip(c) {
                assert!(x == y || (x.is_nan() && y.is_nan()));
                assert!(z == y || (z.is_nan() && y.is_nan()));
            }
        }
    }
}
