//! Off-policy linear TD learning on the Baird counterexample.
//!
//! This crate is `no_std` (it needs `alloc` for the replay buffer) and holds
//! everything that is pure computation: the environment and its closed-form
//! model, the per-transition update rules, and the diagnostic lenses. IO, the
//! experiment harness and the CLI live in `baird-lab`.

#![no_std]
// dense 8x8 kernels read more clearly with explicit indices
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod algorithms;
pub mod buffer;
pub mod diagnostics;
pub mod env;
mod error;
pub mod linalg;

pub use algorithms::{Algorithm, LearnerState, StepSizes};
pub use buffer::ReplayBuffer;
pub use diagnostics::{snapshot, MetricsRecord};
pub use env::{Action, BairdEnv, ExactModel, FeatureBasis, State, Transition};
pub use error::Error;
pub use linalg::{Matrix, Vector};

/// Number of states in the chain.
pub const NUM_STATES: usize = 7;
/// Number of weights in the linear value function.
pub const NUM_FEATURES: usize = 8;
/// Discount used throughout the reported experiments.
pub const DEFAULT_GAMMA: f64 = 0.9;
/// Standard starting point of the main iterator.
pub const DEFAULT_THETA0: Vector = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 10.0, 1.0];
