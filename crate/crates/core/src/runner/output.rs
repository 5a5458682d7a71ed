//! CSV records and JSON sidecars.

use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{Result, RunnerError};
use crate::observables::ObservableRecord;
use crate::qstate::ComplexMatrix;

pub const SCHEMA_VERSION: u32 = 1;

/// Column names in output order.
pub fn csv_header(with_time: bool) -> Vec<String> {
    let mut h = Vec::with_capacity(72);
    if with_time {
        h.push("t".to_string());
    }
    h.extend(["lambda_b", "t_converged", "converged"].map(String::from));
    for basis in ["energy", "pointer"] {
        for i in 1..=4 {
            for j in 1..=4 {
                h.push(format!("{basis}_re_{i}{j}"));
                h.push(format!("{basis}_im_{i}{j}"));
            }
        }
    }
    h.extend(["entropy", "fidelity_gibbs", "fidelity_pointer", "j1", "j2"].map(String::from));
    h
}

fn num(x: f64) -> String {
    // 17 significant digits round-trip every f64
    format!("{x:.16e}")
}

fn row(record: &ObservableRecord, time: Option<f64>) -> Vec<String> {
    let mut r = Vec::with_capacity(72);
    if let Some(t) = time {
        r.push(num(t));
    }
    r.push(num(record.lambda_b));
    r.push(num(record.t_converged));
    r.push(record.converged.to_string());
    for m in [&record.rho_energy, &record.rho_pointer] {
        for z in m.as_slice() {
            r.push(num(z.re));
            r.push(num(z.im));
        }
    }
    for v in [record.entropy, record.fidelity_gibbs, record.fidelity_pointer, record.j1, record.j2] {
        r.push(num(v));
    }
    r
}

fn csv_err(e: impl std::fmt::Display) -> RunnerError {
    RunnerError::Io(e.to_string())
}

/// Writes one row per record; `times` adds a leading `t` column.
pub fn write_csv(path: &Path, records: &[ObservableRecord], times: Option<&[f64]>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(csv_header(times.is_some())).map_err(csv_err)?;
    for (k, rec) in records.iter().enumerate() {
        w.write_record(row(rec, times.map(|t| t[k]))).map_err(csv_err)?;
    }
    w.flush().map_err(csv_err)
}

/// Reads records back; returns the `t` column too when present.
pub fn read_csv(path: &Path) -> Result<(Vec<ObservableRecord>, Option<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let with_time = header.first().map(String::as_str) == Some("t");
    if header != csv_header(with_time) {
        return Err(RunnerError::Io(format!("{}: unexpected CSV columns", path.display())));
    }
    let mut records = Vec::new();
    let mut times = Vec::new();
    for line in r.records() {
        let line = line.map_err(csv_err)?;
        let mut it = line.iter();
        let mut next_f = || -> Result<f64> {
            it.next()
                .ok_or_else(|| RunnerError::Io("short CSV row".into()))?
                .parse::<f64>()
                .map_err(csv_err)
        };
        if with_time {
            times.push(next_f()?);
        }
        let lambda_b = next_f()?;
        let t_converged = next_f()?;
        let converged = match line.get(if with_time { 3 } else { 2 }) {
            Some("true") => true,
            Some("false") => false,
            other => return Err(RunnerError::Io(format!("bad converged field {other:?}"))),
        };
        let offset = if with_time { 4 } else { 3 };
        let vals: Vec<f64> = line
            .iter()
            .skip(offset)
            .map(|s| s.parse::<f64>().map_err(csv_err))
            .collect::<Result<_>>()?;
        let matrix = |start: usize| -> Result<ComplexMatrix> {
            let v = (0..16).map(|k| C64::new(vals[start + 2 * k], vals[start + 2 * k + 1])).collect();
            Ok(ComplexMatrix::from_vec(4, v)?)
        };
        records.push(ObservableRecord {
            lambda_b,
            t_converged,
            converged,
            rho_energy: matrix(0)?,
            rho_pointer: matrix(32)?,
            entropy: vals[64],
            fidelity_gibbs: vals[65],
            fidelity_pointer: vals[66],
            j1: vals[67],
            j2: vals[68],
        });
    }
    Ok((records, with_time.then_some(times)))
}

/// JSON form of a complex matrix: separate real and imaginary row-major parts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatrixJson {
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        Self {
            re: m.as_slice().iter().map(|z| z.re).collect(),
            im: m.as_slice().iter().map(|z| z.im).collect(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(csv_err)?;
    std::fs::write(path, text + "\n").map_err(csv_err)
}
