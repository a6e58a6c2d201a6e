//! Measurement lenses for a learner state `(θ, w)`.
//!
//! All of them are deterministic functions of their inputs. TD errors here are
//! expected backups under the target policy, which is deterministic on this
//! chain, so `δ(s) = γ·v(7) − v(s)`.

use crate::env::{ExactModel, FeatureBasis, State};
use crate::linalg::{self, Vector};
use crate::{NUM_FEATURES, NUM_STATES};

/// Root mean squared value error against the all-zero true values, with
/// uniform state weights (equal to the behavior stationary weights here).
pub fn rmsve(theta: &Vector) -> f64 {
    let v = FeatureBasis::BAIRD.values(theta);
    libm::sqrt(v.iter().map(|x| x * x).sum::<f64>() / NUM_STATES as f64)
}

/// `(Aθ + b)ᵀ C⁺ (Aθ + b)`.
pub fn mspbe(theta: &Vector, model: &ExactModel) -> f64 {
    let e = model.expected_update(theta);
    let q = linalg::dot(&e, &linalg::mat_vec(model.c_pinv(), &e));
    // C⁺ is PSD; clip round-off below zero
    q.max(0.0)
}

/// `‖Aθ + b‖²`.
pub fn neu(theta: &Vector, model: &ExactModel) -> f64 {
    let e = model.expected_update(theta);
    linalg::dot(&e, &e)
}

/// `∇ NEU = 2Aᵀ(Aθ + b)`.
pub fn neu_gradient(theta: &Vector, model: &ExactModel) -> Vector {
    let e = model.expected_update(theta);
    linalg::scale(2.0, &linalg::mat_t_vec(&model.a, &e))
}

/// Per-state expected TD error under the target policy, zero-based by state.
pub fn per_state_td_errors(theta: &Vector, gamma: f64) -> [f64; NUM_STATES] {
    let basis = &FeatureBasis::BAIRD;
    let target = gamma * basis.value(State::LOWER, theta);
    basis.values(theta).map(|v| target - v)
}

/// Helper-iterator regression error
/// `√((1/7) Σ_s (δ(θ, s) − φ(s)ᵀw)²)`.
pub fn rmsre(w: &Vector, theta: &Vector, gamma: f64) -> f64 {
    let td = per_state_td_errors(theta, gamma);
    let pred = FeatureBasis::BAIRD.values(w);
    let ss: f64 = td.iter().zip(&pred).map(|(d, p)| (d - p) * (d - p)).sum();
    libm::sqrt(ss / NUM_STATES as f64)
}

/// `‖Cw − (Aθ + b)‖`, the residual of the helper's fixed-point equation.
pub fn ode_loss(w: &Vector, theta: &Vector, model: &ExactModel) -> f64 {
    let cw = linalg::mat_vec(&model.c, w);
    linalg::norm(&linalg::sub(&cw, &model.expected_update(theta)))
}

/// Helper fixed point `C⁺(Aθ + b)`, the minimum-norm solution of
/// `Cw = Aθ + b`.
pub fn helper_fixed_point(theta: &Vector, model: &ExactModel) -> Vector {
    linalg::mat_vec(model.c_pinv(), &model.expected_update(theta))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContractionRate {
    /// Per-step factor applied to the `φ₇` component of `θ`.
    pub rate: f64,
    /// Set when `rate ≤ 0`: the step is too large for the iteration to be a
    /// monotone contraction.
    pub overshoots: bool,
}

/// Per-step factor `1 − αρ(1 − γ)²‖φ₇‖²` of residual-gradient updates on the
/// state-7 solid transition, along `φ₇`.
pub fn contraction_rate(alpha: f64, gamma: f64, phi7: &Vector, rho: f64) -> ContractionRate {
    let one_minus_gamma = 1.0 - gamma;
    let rate = 1.0 - alpha * rho * one_minus_gamma * one_minus_gamma * linalg::dot(phi7, phi7);
    ContractionRate { rate, overshoots: rate <= 0.0 }
}

/// One logged row of every lens at a single `(θ, w)`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRecord {
    pub step: u64,
    pub rmsve: f64,
    pub mspbe: f64,
    pub neu: f64,
    pub rmsre: f64,
    pub ode_loss: f64,
    pub td_err: [f64; NUM_STATES],
    pub values: [f64; NUM_STATES],
    pub td_target: f64,
    pub theta: Vector,
    pub w: Vector,
}

impl MetricsRecord {
    pub const NUM_COLUMNS: usize = 5 + 2 * NUM_STATES + 1 + 2 * NUM_FEATURES;

    /// Column names in the order of [`MetricsRecord::columns`].
    pub const COLUMN_NAMES: [&'static str; Self::NUM_COLUMNS] = [
        "rmsve", "mspbe", "neu", "rmsre", "ode_loss",
        "td_err_1", "td_err_2", "td_err_3", "td_err_4", "td_err_5", "td_err_6", "td_err_7",
        "v_1", "v_2", "v_3", "v_4", "v_5", "v_6", "v_7",
        "td_target",
        "theta_1", "theta_2", "theta_3", "theta_4", "theta_5", "theta_6", "theta_7", "theta_8",
        "w_1", "w_2", "w_3", "w_4", "w_5", "w_6", "w_7", "w_8",
    ];

    /// Every real-valued field flattened, excluding `step`.
    pub fn columns(&self) -> [f64; Self::NUM_COLUMNS] {
        let mut out = [0.0; Self::NUM_COLUMNS];
        let scalars = [self.rmsve, self.mspbe, self.neu, self.rmsre, self.ode_loss];
        let tail = [self.td_target];
        let parts: [&[f64]; 6] = [&scalars, &self.td_err, &self.values, &tail, &self.theta, &self.w];
        for (slot, x) in out.iter_mut().zip(parts.iter().flat_map(|p| p.iter())) {
            *slot = *x;
        }
        out
    }
}

pub fn snapshot(theta: &Vector, w: &Vector, step: u64, model: &ExactModel) -> MetricsRecord {
    let values = FeatureBasis::BAIRD.values(theta);
    let td_target = model.gamma * values[NUM_STATES - 1];
    MetricsRecord {
        step,
        rmsve: rmsve(theta),
        mspbe: mspbe(theta, model),
        neu: neu(theta, model),
        rmsre: rmsre(w, theta, model.gamma),
        ode_loss: ode_loss(w, theta, model),
        td_err: values.map(|v| td_target - v),
        values,
        td_target,
        theta: *theta,
        w: *w,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ZERO_VECTOR;
    use crate::DEFAULT_THETA0;

    fn model() -> ExactModel {
        ExactModel::new(0.9).unwrap()
    }

    #[test]
    fn rmsve_examples() {
        assert_eq!(rmsve(&ZERO_VECTOR), 0.0);
        assert!((rmsve(&DEFAULT_THETA0) - libm::sqrt(198.0 / 7.0)).abs() < 1e-12);
        let mut e8 = ZERO_VECTOR;
        e8[7] = 1.0;
        assert!((rmsve(&e8) - libm::sqrt(10.0 / 7.0)).abs() < 1e-12);
    }

    #[test]
    fn td_error_profile_at_start() {
        let td = per_state_td_errors(&DEFAULT_THETA0, 0.9);
        for d in &td[..6] {
            assert!((d - 7.8).abs() < 1e-12);
        }
        assert!((td[6] + 1.2).abs() < 1e-12);
        assert_eq!(per_state_td_errors(&ZERO_VECTOR, 0.9), [0.0; NUM_STATES]);
    }

    #[test]
    fn rmsre_at_start() {
        let expect = libm::sqrt((6.0 * 7.8 * 7.8 + 1.2 * 1.2) / 7.0);
        assert!((rmsre(&ZERO_VECTOR, &DEFAULT_THETA0, 0.9) - expect).abs() < 1e-12);
        assert!((expect - 7.2356).abs() < 1e-4);
        assert_eq!(rmsre(&ZERO_VECTOR, &ZERO_VECTOR, 0.9), 0.0);
    }

    #[test]
    fn lenses_vanish_at_zero() {
        let m = model();
        assert_eq!(mspbe(&ZERO_VECTOR, &m), 0.0);
        assert_eq!(neu(&ZERO_VECTOR, &m), 0.0);
        assert_eq!(ode_loss(&ZERO_VECTOR, &ZERO_VECTOR, &m), 0.0);
    }

    #[test]
    fn ode_loss_at_zero_helper_is_root_neu() {
        let m = model();
        let a = ode_loss(&ZERO_VECTOR, &DEFAULT_THETA0, &m);
        assert!((a - libm::sqrt(neu(&DEFAULT_THETA0, &m))).abs() < 1e-12);
    }

    #[test]
    fn neu_is_homogeneous() {
        let m = model();
        let t = [0.3, -1.0, 2.0, 0.0, 0.5, 1.5, -2.0, 0.25];
        let n = neu(&t, &m);
        assert!(n >= 0.0);
        assert!((neu(&linalg::scale(3.0, &t), &m) - 9.0 * n).abs() < 1e-10 * n.max(1.0));
    }

    #[test]
    fn contraction_examples() {
        let phi7 = *FeatureBasis::BAIRD.phi(State::LOWER);
        let c = contraction_rate(0.005, 0.9, &phi7, 1.0);
        assert!((c.rate - 0.99975).abs() < 1e-12);
        assert!(!c.overshoots);
        assert_eq!(contraction_rate(0.0, 0.9, &phi7, 1.0).rate, 1.0);
        assert!(contraction_rate(30.0, 0.9, &phi7, 7.0).overshoots);
    }

    #[test]
    fn snapshot_zero() {
        let r = snapshot(&ZERO_VECTOR, &ZERO_VECTOR, 42, &model());
        assert_eq!(r.step, 42);
        assert!(r.columns().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn snapshot_consistency() {
        let m = model();
        let w = [0.1, 0.0, -0.3, 0.2, 0.0, 0.0, 1.0, -0.4];
        let r = snapshot(&DEFAULT_THETA0, &w, 0, &m);
        for s in 0..NUM_STATES {
            assert_eq!(r.td_err[s], r.td_target - r.values[s]);
        }
        assert_eq!(r.rmsre, rmsre(&w, &DEFAULT_THETA0, 0.9));
        assert_eq!(r.columns()[0], r.rmsve);
        assert_eq!(r.columns()[MetricsRecord::NUM_COLUMNS - 1], w[7]);
        assert_eq!(MetricsRecord::COLUMN_NAMES[19], "td_target");
        assert_eq!(r.columns()[19], r.td_target);
    }
}
