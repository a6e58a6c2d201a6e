//! Grid sweeps over `(α, β)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aggregate::{aggregate, Curve};
use crate::config::ExperimentConfig;
use crate::error::{ConfigError, LabError};
use crate::experiment::{run_experiment, RunLog};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.alpha_grid.is_empty() {
            return Err(ConfigError::EmptyGrid("alpha"));
        }
        if self.beta_grid.is_empty() {
            return Err(ConfigError::EmptyGrid("beta"));
        }
        Ok(())
    }

    /// Grid points, α-major.
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.alpha_grid
            .iter()
            .flat_map(|&a| self.beta_grid.iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn cell_config(&self, alpha: f64, beta: f64) -> ExperimentConfig {
        ExperimentConfig { alpha, beta, ..self.base.clone() }
    }
}

#[derive(Debug)]
pub struct CellOutput {
    pub logs: Vec<RunLog>,
    pub curve: Curve,
}

#[derive(Debug)]
pub struct SweepCell {
    pub alpha: f64,
    pub beta: f64,
    /// A failing cell does not abort the others.
    pub outcome: Result<CellOutput, LabError>,
}

impl SweepCell {
    /// Mean of `metric` at the last logged step, when the cell produced a
    /// non-divergent curve.
    pub fn final_mean(&self, metric: &str) -> Option<f64> {
        let curve = &self.outcome.as_ref().ok()?.curve;
        let col = Curve::column(metric)?;
        Some(curve.final_point()?.mean[col])
    }

    pub fn divergence_fraction(&self) -> Option<f64> {
        Some(self.outcome.as_ref().ok()?.curve.divergence_fraction)
    }
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>, ConfigError> {
    spec.validate()?;
    Ok(spec
        .cells()
        .into_par_iter()
        .map(|(alpha, beta)| {
            let outcome = run_experiment(&spec.cell_config(alpha, beta))
                .map_err(LabError::from)
                .and_then(|logs| Ok(CellOutput { curve: aggregate(&logs)?, logs }));
            SweepCell { alpha, beta, outcome }
        })
        .collect())
}
