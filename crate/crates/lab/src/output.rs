//! CSV writers and readers for run logs and aggregated curves.
//!
//! Reals are written in Rust's shortest round-trip decimal form, so reading a
//! file back yields bit-identical values.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::Path;

use baird_core::{MetricsRecord, NUM_FEATURES, NUM_STATES};

use crate::aggregate::Curve;
use crate::error::LabError;
use crate::experiment::RunLog;

pub fn metrics_header() -> Vec<&'static str> {
    let mut h = vec!["run_id", "seed", "step"];
    h.extend(MetricsRecord::COLUMN_NAMES);
    h.push("diverged");
    h
}

fn real(x: f64) -> String {
    format!("{x:?}")
}

pub fn write_logs<W: Write>(logs: &[RunLog], out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(metrics_header())?;
    for log in logs {
        for rec in &log.records {
            let mut row = vec![log.run_id.to_string(), log.seed.to_string(), rec.step.to_string()];
            row.extend(rec.columns().into_iter().map(real));
            row.push(log.diverged.to_string());
            w.write_record(&row)?;
        }
    }
    w.flush().map_err(|e| LabError::Csv(e.into()))?;
    Ok(())
}

pub fn write_logs_path(logs: &[RunLog], path: impl AsRef<Path>) -> Result<(), LabError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_logs(logs, io::BufWriter::new(file))
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, LabError> {
    let raw = rec.get(i).unwrap_or_default();
    raw.parse().map_err(|_| {
        LabError::Aggregate(format!("line {line}: cannot parse column `{}` from {raw:?}", metrics_header()[i]))
    })
}

/// Inverse of [`write_logs`]. The config fingerprint is not stored in the
/// CSV and comes back empty.
pub fn read_logs<R: Read>(input: R) -> Result<Vec<RunLog>, LabError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header != metrics_header() {
        return Err(LabError::Aggregate("metrics CSV header does not match the schema".into()));
    }
    let mut logs: Vec<RunLog> = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        let run_id: u32 = field(&row, 0, line)?;
        let seed: u64 = field(&row, 1, line)?;
        let step: u64 = field(&row, 2, line)?;
        let mut cols = [0.0; MetricsRecord::NUM_COLUMNS];
        for (c, slot) in cols.iter_mut().enumerate() {
            *slot = field(&row, 3 + c, line)?;
        }
        let diverged: bool = field(&row, 3 + MetricsRecord::NUM_COLUMNS, line)?;
        let rec = record_from_columns(step, &cols);
        match logs.last_mut() {
            Some(log) if log.run_id == run_id => log.records.push(rec),
            _ => logs.push(RunLog { run_id, seed, fingerprint: String::new(), records: vec![rec], diverged }),
        }
    }
    Ok(logs)
}

pub fn read_logs_path(path: impl AsRef<Path>) -> Result<Vec<RunLog>, LabError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    read_logs(io::BufReader::new(file))
}

fn record_from_columns(step: u64, c: &[f64; MetricsRecord::NUM_COLUMNS]) -> MetricsRecord {
    let s = NUM_STATES;
    let f = NUM_FEATURES;
    MetricsRecord {
        step,
        rmsve: c[0],
        mspbe: c[1],
        neu: c[2],
        rmsre: c[3],
        ode_loss: c[4],
        td_err: std::array::from_fn(|i| c[5 + i]),
        values: std::array::from_fn(|i| c[5 + s + i]),
        td_target: c[5 + 2 * s],
        theta: std::array::from_fn(|i| c[6 + 2 * s + i]),
        w: std::array::from_fn(|i| c[6 + 2 * s + f + i]),
    }
}

pub fn curve_header() -> Vec<String> {
    let mut h: Vec<String> = ["step", "runs_total", "runs_used", "divergence_fraction"]
        .into_iter()
        .map(String::from)
        .collect();
    for name in MetricsRecord::COLUMN_NAMES {
        h.push(format!("{name}_mean"));
        h.push(format!("{name}_stderr"));
    }
    h
}

pub fn write_curve<W: Write>(curve: &Curve, out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(curve_header())?;
    for p in &curve.points {
        let mut row = vec![
            p.step.to_string(),
            curve.runs_total.to_string(),
            curve.runs_used.to_string(),
            real(curve.divergence_fraction),
        ];
        for (m, s) in p.mean.iter().zip(&p.stderr) {
            row.push(real(*m));
            row.push(real(*s));
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| LabError::Csv(e.into()))?;
    Ok(())
}

pub fn write_curve_path(curve: &Curve, path: impl AsRef<Path>) -> Result<(), LabError> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_curve(curve, io::BufWriter::new(file))
}
