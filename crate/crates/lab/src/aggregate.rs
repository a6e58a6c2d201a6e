//! Pointwise mean and standard error across runs.

use baird_core::MetricsRecord;

use crate::error::LabError;
use crate::experiment::RunLog;

const NCOL: usize = MetricsRecord::NUM_COLUMNS;

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub step: u64,
    pub mean: [f64; NCOL],
    /// Sample standard deviation over √n; zero for a single run.
    pub stderr: [f64; NCOL],
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    pub points: Vec<CurvePoint>,
    pub runs_total: usize,
    /// Runs that did not diverge; only these enter the means.
    pub runs_used: usize,
    pub divergence_fraction: f64,
}

impl Curve {
    pub fn column(name: &str) -> Option<usize> {
        MetricsRecord::COLUMN_NAMES.iter().position(|c| *c == name)
    }

    pub fn at_step(&self, step: u64) -> Option<&CurvePoint> {
        self.points.iter().find(|p| p.step == step)
    }

    /// Mean of metric `name` at `step`.
    pub fn mean(&self, name: &str, step: u64) -> Option<f64> {
        Some(self.at_step(step)?.mean[Self::column(name)?])
    }

    pub fn final_point(&self) -> Option<&CurvePoint> {
        self.points.last()
    }
}

pub fn aggregate(logs: &[RunLog]) -> Result<Curve, LabError> {
    if logs.is_empty() {
        return Err(LabError::Aggregate("no run logs".into()));
    }
    let used: Vec<&RunLog> = logs.iter().filter(|l| !l.diverged).collect();
    let divergence_fraction = (logs.len() - used.len()) as f64 / logs.len() as f64;
    let mut points = Vec::new();
    if let Some(first) = used.first() {
        for log in &used {
            let same = log.records.len() == first.records.len()
                && log.records.iter().zip(&first.records).all(|(a, b)| a.step == b.step);
            if !same {
                return Err(LabError::Aggregate(format!(
                    "run {} does not share the step grid of run {}",
                    log.run_id, first.run_id
                )));
            }
        }
        let n = used.len() as f64;
        for (i, rec) in first.records.iter().enumerate() {
            let rows: Vec<[f64; NCOL]> = used.iter().map(|l| l.records[i].columns()).collect();
            let mean: [f64; NCOL] = std::array::from_fn(|c| rows.iter().map(|r| r[c]).sum::<f64>() / n);
            let stderr: [f64; NCOL] = std::array::from_fn(|c| {
                if used.len() < 2 {
                    return 0.0;
                }
                let var = rows.iter().map(|r| (r[c] - mean[c]).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            });
            points.push(CurvePoint { step: rec.step, mean, stderr });
        }
    }
    Ok(Curve { points, runs_total: logs.len(), runs_used: used.len(), divergence_fraction })
}
