//! Invariants of the update rules, including the TDC → RG reduction and the
//! link between sampled updates and the closed-form expectations.

use baird_core::algorithms::{
    expected_update_estimate, gtd2_step, impression_direction, rg_step, tdc_step, tdrc_step,
    transposed_model_apply,
};
use baird_core::diagnostics::contraction_rate;
use baird_core::linalg::{self, Vector, ZERO_VECTOR};
use baird_core::{Action, Algorithm, BairdEnv, LearnerState, ReplayBuffer, State, StepSizes, Transition, DEFAULT_THETA0};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GAMMA: f64 = 0.9;

fn env() -> BairdEnv {
    BairdEnv::new(GAMMA).unwrap()
}

fn transition(state: usize, solid: bool, seed: u64) -> Transition {
    let action = if solid { Action::Solid } else { Action::Dashed };
    env().step_with(State::new(state).unwrap(), action, &mut ChaCha8Rng::seed_from_u64(seed))
}

/// A helper iterate whose prediction at `tr.s` equals δ(θ) exactly.
fn exact_helper(tr: &Transition, theta: &Vector) -> Vector {
    let delta = tr.td_error(theta, GAMMA);
    let mut w = ZERO_VECTOR;
    let i = tr.s.index();
    w[i] = delta / tr.phi[i];
    w
}

fn vec8(range: f64) -> impl Strategy<Value = Vector> {
    prop::array::uniform8(-range..range)
}

fn sizes() -> impl Strategy<Value = StepSizes> {
    (0.0..0.1, 0.0..0.1, 0.0..2.0, 0.0..2.0).prop_map(|(alpha, beta, eta, reg)| StepSizes { alpha, beta, eta, reg })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn tdc_reduces_to_rg(state in 1usize..=7, solid: bool, seed: u64, theta in vec8(10.0), alpha in 0.0..0.1, beta in 0.0..0.1) {
        let tr = transition(state, solid, seed);
        let w = exact_helper(&tr, &theta);
        prop_assert_eq!(linalg::dot(&tr.phi, &w), tr.td_error(&theta, GAMMA));
        let st = LearnerState::new(theta, w);
        let sz = StepSizes::new(alpha, beta);
        let a = tdc_step(&st, &tr, &sz, GAMMA).theta;
        let b = rg_step(&st, &tr, &sz, GAMMA).theta;
        let g = gtd2_step(&st, &tr, &sz, GAMMA).theta;
        for i in 0..8 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-14, "tdc {} rg {}", a[i], b[i]);
            prop_assert!((g[i] - b[i]).abs() <= 1e-14, "gtd2 {} rg {}", g[i], b[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn zero_is_fixed(state in 1usize..=7, solid: bool, seed: u64, sz in sizes()) {
        let tr = transition(state, solid, seed);
        for algo in Algorithm::ALL {
            if let Some(step) = algo.step_fn() {
                let out = step(&LearnerState::zero(), &tr, &sz, GAMMA);
                prop_assert_eq!(out.theta, ZERO_VECTOR);
                prop_assert_eq!(out.w, ZERO_VECTOR);
            }
        }
    }

    #[test]
    fn dashed_transitions_do_not_move_theta(state in 1usize..=7, seed: u64, theta in vec8(10.0), w in vec8(3.0), sz in sizes()) {
        let tr = transition(state, false, seed);
        prop_assert_eq!(tr.rho, 0.0);
        let st = LearnerState::new(theta, w);
        for algo in Algorithm::ALL {
            if let Some(step) = algo.step_fn() {
                let out = step(&st, &tr, &sz, GAMMA);
                prop_assert_eq!(out.theta, theta, "{}", algo);
                if algo != Algorithm::Tdrc {
                    prop_assert_eq!(out.w, w, "{}", algo);
                }
            }
        }
        let shrink = 1.0 - sz.eta * sz.alpha * sz.reg;
        let out = tdrc_step(&st, &tr, &sz, GAMMA);
        for (got, w0) in out.w.iter().zip(&w) {
            prop_assert!((got - shrink * w0).abs() <= 1e-15 * w0.abs().max(1.0));
        }
    }

    #[test]
    fn updates_stay_finite(state in 1usize..=7, solid: bool, seed: u64, theta in vec8(1e3), w in vec8(1e3), sz in sizes()) {
        let tr = transition(state, solid, seed);
        let st = LearnerState::new(theta, w);
        for algo in Algorithm::ALL {
            if let Some(step) = algo.step_fn() {
                prop_assert!(step(&st, &tr, &sz, GAMMA).is_finite());
            }
        }
    }
}

#[test]
fn tdc_expected_increment_matches_model() {
    let env = env();
    let model = env.exact_model();
    let theta = DEFAULT_THETA0;
    let w = [0.5, -0.25, 0.0, 0.3, 0.1, -0.4, 1.0, -0.6];
    let sz = StepSizes::new(0.005, 0.05);
    let st = LearnerState::new(theta, w);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let n = 100_000;
    let mut sum = ZERO_VECTOR;
    let mut s = env.initial_state(&mut rng);
    for _ in 0..n {
        let tr = env.sample_transition(s, &mut rng);
        s = tr.s_next;
        let next = tdc_step(&st, &tr, &sz, GAMMA);
        sum = linalg::add(&sum, &linalg::sub(&next.theta, &theta));
    }
    let mean = linalg::scale(1.0 / n as f64, &sum);

    // α[Aθ + b − γ E[ρ φ' φᵀ] w]; under π the next features are always φ(7)
    let phi7 = *env.basis().phi(State::LOWER);
    let avg_pred: f64 = State::all()
        .map(|s| model.mu[s.index()] * linalg::dot(env.basis().phi(s), &w))
        .sum();
    let expected = linalg::scale(
        sz.alpha,
        &linalg::axpy(-GAMMA * avg_pred, &phi7, &model.expected_update(&theta)),
    );
    for i in 0..8 {
        assert!((mean[i] - expected[i]).abs() < 0.02, "component {i}: {} vs {}", mean[i], expected[i]);
    }
}

fn mixed_buffer(n: usize, seed: u64) -> ReplayBuffer {
    let env = env();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut buf = ReplayBuffer::unbounded();
    let mut s = env.initial_state(&mut rng);
    while buf.len() < n {
        let tr = env.sample_transition(s, &mut rng);
        s = tr.s_next;
        // keep the population informative: every item has ρ > 0
        if tr.rho > 0.0 {
            buf.push(tr);
        }
    }
    buf
}

fn half_squared_neu_hat(pop: &[Transition], theta: &Vector) -> f64 {
    let g = expected_update_estimate(pop, theta, GAMMA);
    0.5 * linalg::dot(&g, &g)
}

#[test]
fn impression_direction_is_gradient_at_full_population() {
    let pop: Vec<Transition> = mixed_buffer(20, 4).iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 1e-6;
    for _ in 0..5 {
        let theta: Vector = std::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let dir = impression_direction(&pop, &pop, &theta, GAMMA);
        let fd: Vector = std::array::from_fn(|i| {
            let mut hi = theta;
            let mut lo = theta;
            hi[i] += h;
            lo[i] -= h;
            (half_squared_neu_hat(&pop, &hi) - half_squared_neu_hat(&pop, &lo)) / (2.0 * h)
        });
        let err = linalg::norm(&linalg::sub(&dir, &fd)) / linalg::norm(&dir);
        assert!(err < 1e-6, "relative error {err}");
    }
}

#[test]
fn independent_batches_are_unbiased() {
    let buf = mixed_buffer(20, 5);
    let pop: Vec<Transition> = buf.iter().copied().collect();
    let theta = DEFAULT_THETA0;
    let full = impression_direction(&pop, &pop, &theta, GAMMA);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let draws = 10_000;
    let mut sum = ZERO_VECTOR;
    for _ in 0..draws {
        let b1 = buf.sample(10, &mut rng).unwrap();
        let b2 = buf.sample(10, &mut rng).unwrap();
        let g = expected_update_estimate(&b2, &theta, GAMMA);
        sum = linalg::add(&sum, &transposed_model_apply(&b1, &g, GAMMA));
    }
    let mean = linalg::scale(1.0 / draws as f64, &sum);
    let rel = linalg::norm(&linalg::sub(&mean, &full)) / linalg::norm(&full);
    assert!(rel < 1e-2, "relative gap {rel}");
}

#[test]
fn repeated_state7_rg_follows_geometric_envelope() {
    let tr = transition(7, true, 0);
    let phi7 = tr.phi;
    let unit = linalg::scale(1.0 / linalg::norm(&phi7), &phi7);
    for alpha in [0.005 / 7.0, 0.005] {
        let rate = contraction_rate(alpha, GAMMA, &phi7, tr.rho).rate;
        let sz = StepSizes::new(alpha, 0.0);
        let mut st = LearnerState::new(DEFAULT_THETA0, ZERO_VECTOR);
        let c0 = linalg::dot(&unit, &st.theta);
        let mut worst = 0.0_f64;
        for t in 1..=10_000 {
            st = rg_step(&st, &tr, &sz, GAMMA);
            worst = worst.max((linalg::dot(&unit, &st.theta) - rate.powi(t) * c0).abs());
        }
        assert!(worst < 1e-9, "alpha {alpha}: {worst}");
    }
    // with α_eff = αρ = 0.005 this is the quoted per-step factor
    assert!((contraction_rate(0.005 / 7.0, GAMMA, &phi7, 7.0).rate - 0.99975).abs() < 1e-12);
}
