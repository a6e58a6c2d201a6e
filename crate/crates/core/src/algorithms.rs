//! Per-transition update rules.
//!
//! Every rule is a pure function from the pre-update learner state to the
//! post-update one. Both iterators read the same input `(θ, w)`, and the whole
//! per-transition update is scaled by the importance ratio `ρ`, so a dashed
//! transition (`ρ = 0`) never moves `θ`.

use core::fmt;
use core::str::FromStr;

use rand::Rng;

use crate::buffer::ReplayBuffer;
use crate::linalg::{self, Vector, ZERO_VECTOR};
use crate::{Error, Transition};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnerState {
    /// Main iterator.
    pub theta: Vector,
    /// Helper iterator; unused by TD(0), RG and Impression GTD.
    pub w: Vector,
    pub t: u64,
}

impl LearnerState {
    pub fn new(theta: Vector, w: Vector) -> Self {
        LearnerState { theta, w, t: 0 }
    }

    pub fn zero() -> Self {
        Self::new(ZERO_VECTOR, ZERO_VECTOR)
    }

    pub fn is_finite(&self) -> bool {
        self.theta.iter().chain(&self.w).all(|x| x.is_finite())
    }

    fn advance(&self, theta: Vector, w: Vector) -> Self {
        LearnerState { theta, w, t: self.t + 1 }
    }
}

/// Constant step sizes for one run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepSizes {
    /// Main step size α.
    pub alpha: f64,
    /// Helper step size β.
    pub beta: f64,
    /// Helper-to-main step ratio η (TDRC).
    pub eta: f64,
    /// ℓ2 regularization of the helper (TDRC).
    pub reg: f64,
}

impl StepSizes {
    pub fn new(alpha: f64, beta: f64) -> Self {
        StepSizes { alpha, beta, eta: 1.0, reg: 0.0 }
    }

    pub fn tdrc(alpha: f64, eta: f64, reg: f64) -> Self {
        StepSizes { alpha, beta: 0.0, eta, reg }
    }
}

pub type StepFn = fn(&LearnerState, &Transition, &StepSizes, f64) -> LearnerState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Td0,
    Tdc,
    Gtd,
    Gtd2,
    Tdrc,
    Rg,
    ImpressionGtd,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Td0,
        Algorithm::Tdc,
        Algorithm::Gtd,
        Algorithm::Gtd2,
        Algorithm::Tdrc,
        Algorithm::Rg,
        Algorithm::ImpressionGtd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Td0 => "td0",
            Algorithm::Tdc => "tdc",
            Algorithm::Gtd => "gtd",
            Algorithm::Gtd2 => "gtd2",
            Algorithm::Tdrc => "tdrc",
            Algorithm::Rg => "rg",
            Algorithm::ImpressionGtd => "impression_gtd",
        }
    }

    /// The single-transition rule, or `None` for the buffered Impression GTD.
    pub fn step_fn(self) -> Option<StepFn> {
        match self {
            Algorithm::Td0 => Some(td0_step),
            Algorithm::Tdc => Some(tdc_step),
            Algorithm::Gtd => Some(gtd_step),
            Algorithm::Gtd2 => Some(gtd2_step),
            Algorithm::Tdrc => Some(tdrc_step),
            Algorithm::Rg => Some(rg_step),
            Algorithm::ImpressionGtd => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::UnknownAlgorithm(s.into()))
    }
}

/// Off-policy semi-gradient TD(0): `θ' = θ + αρδφ`.
pub fn td0_step(state: &LearnerState, tr: &Transition, sizes: &StepSizes, gamma: f64) -> LearnerState {
    let delta = tr.td_error(&state.theta, gamma);
    let theta = linalg::axpy(sizes.alpha * tr.rho * delta, &tr.phi, &state.theta);
    state.advance(theta, state.w)
}

// Shared by TDC, GTD2 and TDRC: w moves along ρ(δ − φᵀw)φ.
fn helper_regression(w: &Vector, tr: &Transition, delta: f64, step: f64) -> Vector {
    let err = delta - linalg::dot(&tr.phi, w);
    linalg::axpy(step * tr.rho * err, &tr.phi, w)
}

// TDC's main update: θ + αρ[δφ − γφ'(φᵀw)].
fn tdc_main(state: &LearnerState, tr: &Transition, delta: f64, alpha: f64, gamma: f64) -> Vector {
    let pred = linalg::dot(&tr.phi, &state.w);
    let k = alpha * tr.rho;
    let theta = linalg::axpy(k * delta, &tr.phi, &state.theta);
    linalg::axpy(-k * gamma * pred, &tr.phi_next, &theta)
}

/// TDC: `θ' = θ − αρ[−δφ + γφ'(φᵀw)]`, `w' = w − βρ(φᵀw − δ)φ`.
pub fn tdc_step(state: &LearnerState, tr: &Transition, sizes: &StepSizes, gamma: f64) -> LearnerState {
    let delta = tr.td_error(&state.theta, gamma);
    let theta = tdc_main(state, tr, delta, sizes.alpha, gamma);
    let w = helper_regression(&state.w, tr, delta, sizes.beta);
    state.advance(theta, w)
}

// θ + αρ(φ − γφ')(φᵀw), the main update of GTD and GTD2.
fn gradient_correction_main(state: &LearnerState, tr: &Transition, alpha: f64, gamma: f64) -> Vector {
    let k = alpha * tr.rho * linalg::dot(&tr.phi, &state.w);
    let theta = linalg::axpy(k, &tr.phi, &state.theta);
    linalg::axpy(-k * gamma, &tr.phi_next, &theta)
}

/// GTD: the helper tracks `E[ρδφ]`, `w' = w + βρ(δφ − w)`; the main iterator
/// moves along `(φ − γφ')(φᵀw)`.
pub fn gtd_step(state: &LearnerState, tr: &Transition, sizes: &StepSizes, gamma: f64) -> LearnerState {
    let delta = tr.td_error(&state.theta, gamma);
    let theta = gradient_correction_main(state, tr, sizes.alpha, gamma);
    let k = sizes.beta * tr.rho;
    let w: Vector = core::array::from_fn(|i| state.w[i] + k * (delta * tr.phi[i] - state.w[i]));
    state.advance(theta, w)
}

/// GTD2: TDC's helper rule with the GTD main update.
pub fn gtd2_step(state: &LearnerState, tr: &Transition, sizes: &StepSizes, gamma: f64) -> LearnerState {
    let delta = tr.td_error(&state.theta, gamma);
    let theta = gradient_correction_main(state, tr, sizes.alpha, gamma);
    let w = helper_regression(&state.w, tr, delta, sizes.beta);
    state.advance(theta, w)
}

/// TDRC: TDC's main update with step α, and an ℓ2-regularized helper with
/// step `ηα`. The decay `−reg·w` is applied on every transition, independent
/// of `ρ`.
pub fn tdrc_step(state: &LearnerState, tr: &Transition, sizes: &StepSizes, gamma: f64) -> LearnerState {
    let delta = tr.td_error(&state.theta, gamma);
    let theta = tdc_main(state, tr, delta, sizes.alpha, gamma);
    let step = sizes.eta * sizes.alpha;
    let err = tr.rho * (delta - linalg::dot(&tr.phi, &state.w));
    let w: Vector =
        core::array::from_fn(|i| state.w[i] + step * (err * tr.phi[i] - sizes.reg * state.w[i]));
    state.advance(theta, w)
}

/// Residual gradient: `θ' = θ − αρδ(γφ' − φ)`.
pub fn rg_step(state: &LearnerState, tr: &Transition, sizes: &StepSizes, gamma: f64) -> LearnerState {
    let delta = tr.td_error(&state.theta, gamma);
    let k = sizes.alpha * tr.rho * delta;
    let theta: Vector =
        core::array::from_fn(|i| state.theta[i] - k * (gamma * tr.phi_next[i] - tr.phi[i]));
    state.advance(theta, state.w)
}

/// Mini-batch estimate of the expected TD update, `Âθ + b̂ = mean ρδφ`.
pub fn expected_update_estimate<'a, I>(batch: I, theta: &Vector, gamma: f64) -> Vector
where
    I: IntoIterator<Item = &'a Transition>,
{
    let mut sum = ZERO_VECTOR;
    let mut n = 0usize;
    for tr in batch {
        let k = tr.rho * tr.td_error(theta, gamma);
        sum = linalg::axpy(k, &tr.phi, &sum);
        n += 1;
    }
    if n == 0 {
        sum
    } else {
        linalg::scale(1.0 / n as f64, &sum)
    }
}

/// `Âᵀ g` with `Â = mean ρφ(γφ' − φ)ᵀ` over `batch`.
pub fn transposed_model_apply<'a, I>(batch: I, g: &Vector, gamma: f64) -> Vector
where
    I: IntoIterator<Item = &'a Transition>,
{
    let mut sum = ZERO_VECTOR;
    let mut n = 0usize;
    for tr in batch {
        let k = tr.rho * linalg::dot(&tr.phi, g);
        for i in 0..sum.len() {
            sum[i] += k * (gamma * tr.phi_next[i] - tr.phi[i]);
        }
        n += 1;
    }
    if n == 0 {
        sum
    } else {
        linalg::scale(1.0 / n as f64, &sum)
    }
}

/// Descent direction `Â₁ᵀ(Â₂θ + b̂₂)` on `½‖Aθ + b‖²` from two batches.
pub fn impression_direction(first: &[Transition], second: &[Transition], theta: &Vector, gamma: f64) -> Vector {
    let g = expected_update_estimate(second, theta, gamma);
    transposed_model_apply(first, &g, gamma)
}

/// Impression GTD: one SGD step on the NEU objective using two disjoint
/// uniform mini-batches drawn from the replay buffer.
pub fn impression_gtd_step<R: Rng + ?Sized>(
    state: &LearnerState,
    buffer: &ReplayBuffer,
    sizes: &StepSizes,
    batch: usize,
    gamma: f64,
    rng: &mut R,
) -> Result<LearnerState, Error> {
    let needed = 2 * batch;
    if buffer.len() < needed || batch == 0 {
        return Err(Error::BufferNotReady { needed: needed.max(2), available: buffer.len() });
    }
    let idx = buffer.sample_indices(needed, rng)?;
    let (first, second) = idx.split_at(batch);
    let at = |&i: &usize| buffer.get(i).expect("sampled index in range");
    let g = expected_update_estimate(second.iter().map(at), &state.theta, gamma);
    let dir = transposed_model_apply(first.iter().map(at), &g, gamma);
    let theta = linalg::axpy(-sizes.alpha, &dir, &state.theta);
    Ok(state.advance(theta, state.w))
}
