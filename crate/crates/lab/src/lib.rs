//! Experiment harness for the Baird counterexample laboratory: configuration,
//! seeded runs, sweeps, aggregation, CSV output and the `baird` CLI.

pub mod aggregate;
pub mod config;
pub mod error;
pub mod experiment;
pub mod output;
pub mod selfcheck;
pub mod seeding;
pub mod sweep;

pub use aggregate::{aggregate, Curve, CurvePoint};
pub use config::{read_config, write_config, ExperimentConfig};
pub use error::{ConfigError, LabError};
pub use experiment::{run_experiment, RunLog, DIVERGENCE_GUARD};
pub use sweep::{run_sweep, SweepCell, SweepSpec};
