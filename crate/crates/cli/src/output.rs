//! CSV and JSON writers.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{json, Value};

use rlattract_core::attractivity::{AttractivityCertificate, ScanResult, TailBound};
use rlattract_core::solver::WeightedTrajectory;

use crate::CliError;

/// Full-precision scientific notation (17 significant digits).
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text: `#`-prefixed metadata, one header row, comma-separated rows.
#[derive(Debug, Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(meta: &[(&str, String)], columns: &[String]) -> Self {
        let mut text = String::new();
        for (k, v) in meta {
            let _ = writeln!(text, "# {k} = {v}");
        }
        let _ = writeln!(text, "{}", columns.join(","));
        Self { text }
    }

    pub fn row(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| num(v)).collect();
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_text(path, &self.text)
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
}

pub fn trajectory_columns(dim: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=dim).map(|i| format!("y_{i}")));
    cols.extend((1..=dim).map(|i| format!("x_{i}")));
    cols.push("residual".into());
    cols
}

/// Rows t, y, x = t^{α−1}y, residual. Missing residuals are written as NaN.
pub fn trajectory_rows(csv: &mut Csv, traj: &WeightedTrajectory, residuals: Option<&[f64]>) {
    for j in 0..traj.len() {
        let mut row = vec![traj.t(j)];
        row.extend_from_slice(traj.y_at(j));
        row.extend(traj.x_at(j));
        row.push(residuals.map_or(f64::NAN, |r| r[j]));
        csv.row(&row);
    }
}

/// Scan samples as (t, value) rows.
pub fn scan_csv(meta: &[(&str, String)], value_name: &str, scan: &ScanResult) -> Csv {
    let mut csv = Csv::new(meta, &["t".into(), value_name.into()]);
    csv.comment(&format!("base_rows = {}", scan.base_len));
    for &(t, v) in &scan.samples {
        csv.row(&[t, v]);
    }
    csv
}

/// Kernel scan: t, tail-bound value, G(t) on the union of both grids.
pub fn kernel_csv(meta: &[(&str, String)], g: &ScanResult, tail: Option<&TailBound>) -> Csv {
    let mut rows: BTreeMap<u64, (f64, f64, f64)> = BTreeMap::new();
    for &(t, v) in &g.samples {
        rows.entry(t.to_bits()).or_insert((t, f64::NAN, f64::NAN)).2 = v;
    }
    if let Some(tb) = tail {
        for &(t, v) in &tb.samples {
            rows.entry(t.to_bits()).or_insert((t, f64::NAN, f64::NAN)).1 = v;
        }
    }
    let mut csv = Csv::new(meta, &["t".into(), "tail_bound".into(), "G".into()]);
    for (t, m, gv) in rows.into_values() {
        csv.row(&[t, m, gv]);
    }
    csv
}

/// Finite numbers pass through; NaN and infinities become null.
fn fin(v: Option<f64>) -> Value {
    match v {
        Some(x) if x.is_finite() => json!(x),
        _ => Value::Null,
    }
}

/// Certificate document with a fixed set of keys. serde_json keeps object
/// keys sorted, so the output is stable.
pub fn certificate_json(cert: &AttractivityCertificate) -> Value {
    let mut notes = cert.notes.clone();
    if let Some(stage) = &cert.failing_stage {
        notes.insert(0, format!("failing stage: {stage}"));
    }
    let eig: Vec<Value> = cert
        .sector
        .eigenvalues
        .iter()
        .map(|z| json!([fin(Some(z.re)), fin(Some(z.im))]))
        .collect();
    let decay = cert.theorem3.as_ref();
    json!({
        "verdict": cert.verdict.as_str(),
        "sector": {
            "in_sector": cert.sector.in_sector,
            "margin": fin(Some(cert.sector.margin)),
            "eigenvalues": eig,
        },
        "q": fin(cert.q.as_ref().map(|r| r.sup)),
        "Q_threshold": fin(cert.q_threshold),
        "G_sup": fin(cert.g_sup.as_ref().map(|r| r.sup)),
        "lemma_M": {
            "M": fin(cert.lemma_m.as_ref().map(|m| m.m)),
            "t0": fin(cert.lemma_m.as_ref().map(|m| m.t0)),
        },
        "g_bound": fin(cert.g_bound.as_ref().map(|r| r.sup)),
        "theorem3": {
            "K": fin(decay.map(|d| d.k)),
            "T": fin(decay.map(|d| d.t)),
            "decay_verified": decay.is_some_and(|d| d.decay_verified),
        },
        "scan": {
            "t_min": fin(Some(cert.grid.t_min)),
            "t_max": fin(Some(cert.grid.t_max)),
            "per_decade": cert.grid.per_decade,
            "stabilized": cert.stabilized,
        },
        "convention_notes": notes,
    })
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serialises");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_keep_seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(-2.0), "-2.0000000000000000e0");
        assert_eq!("1.0000000000000001e-1".parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn csv_layout() {
        let mut csv = Csv::new(&[("alpha", "0.5".into())], &["t".into(), "v".into()]);
        csv.row(&[1.0, f64::NAN]);
        csv.comment("end");
        assert_eq!(csv.as_str(), "# alpha = 0.5\nt,v\n1.0000000000000000e0,NaN\n# end\n");
    }

    #[test]
    fn non_finite_becomes_null() {
        assert_eq!(fin(Some(f64::INFINITY)), Value::Null);
        assert_eq!(fin(None), Value::Null);
        assert_eq!(fin(Some(1.5)), json!(1.5));
    }
}
