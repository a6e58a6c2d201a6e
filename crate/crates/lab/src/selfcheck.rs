//! Fast invariant checks behind the `selfcheck` command.

use baird_core::algorithms::{rg_step, tdc_step};
use baird_core::diagnostics::{contraction_rate, helper_fixed_point, neu, neu_gradient, ode_loss};
use baird_core::linalg::{self, Matrix, Vector, ZERO_MATRIX, ZERO_VECTOR};
use baird_core::{Algorithm, BairdEnv, ExactModel, LearnerState, State, StepSizes, Transition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn random_theta<R: Rng>(rng: &mut R, scale: f64) -> Vector {
    std::array::from_fn(|_| rng.gen_range(-scale..scale))
}

/// Helper iterate that predicts the sampled TD error exactly at `tr.s`.
pub fn exact_helper(tr: &Transition, theta: &Vector, gamma: f64) -> Vector {
    let delta = tr.td_error(theta, gamma);
    let mut w = ZERO_VECTOR;
    // φ(s) has a single non-shared entry: 2 at s for upper states, 1 at 7
    let i = tr.s.index();
    w[i] = delta / tr.phi[i];
    w
}

pub fn run_all(gamma: f64, seed: u64) -> Vec<Check> {
    let env = BairdEnv::new(gamma).expect("valid discount");
    let model = env.exact_model();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mu_err = model.mu.iter().fold(0.0_f64, |m, x| m.max((x - 1.0 / 7.0).abs()));
    out.push(check(
        "closed-form model",
        model.b == ZERO_VECTOR && model.rank_a() == 7 && model.rank_c() == 7 && mu_err < 1e-12,
        format!("rank(A)={} rank(C)={} max|mu-1/7|={mu_err:e}", model.rank_a(), model.rank_c()),
    ));

    let gap = model.c_eigenvalues()[1];
    out.push(check("spectral gap of C", gap > 1e-3, format!("smallest nonzero eigenvalue {gap}")));

    let proj = projector_off_range(&model);
    let worst = (0..100)
        .map(|_| linalg::norm(&linalg::mat_vec(&proj, &model.expected_update(&random_theta(&mut rng, 10.0)))))
        .fold(0.0, f64::max);
    out.push(check("A theta + b lies in range(C)", worst < 1e-10, format!("max residual {worst:e}")));

    let sizes = StepSizes::new(0.01, 0.05);
    let mut worst = 0.0_f64;
    let mut s = env.initial_state(&mut rng);
    for _ in 0..1000 {
        let tr = env.sample_transition(s, &mut rng);
        s = tr.s_next;
        let theta = random_theta(&mut rng, 10.0);
        let st = LearnerState::new(theta, exact_helper(&tr, &theta, gamma));
        let a = tdc_step(&st, &tr, &sizes, gamma).theta;
        let b = rg_step(&st, &tr, &sizes, gamma).theta;
        worst = a.iter().zip(&b).fold(worst, |m, (x, y)| m.max((x - y).abs()));
    }
    out.push(check("TDC reduces to RG when the helper is exact", worst <= 1e-14, format!("max gap {worst:e}")));

    let phi7 = *env.basis().phi(State::LOWER);
    let rate = contraction_rate(0.005, gamma, &phi7, 1.0).rate;
    let expect = 1.0 - 0.005 * (1.0 - gamma).powi(2) * 5.0;
    out.push(check("state-7 contraction factor", (rate - expect).abs() < 1e-12, format!("rate {rate}")));

    let mut worst = 0.0_f64;
    for _ in 0..5 {
        let theta = random_theta(&mut rng, 5.0);
        let g = neu_gradient(&theta, &model);
        let fd = central_difference(|t| neu(t, &model), &theta, 1e-6);
        worst = worst.max(linalg::norm(&linalg::sub(&g, &fd)) / linalg::norm(&g));
    }
    out.push(check("NEU gradient vs finite differences", worst < 1e-6, format!("max relative error {worst:e}")));

    let (a_hat, c_hat) = monte_carlo_model(&env, 100_000, &mut rng);
    let ea = max_entry_gap(&a_hat, &model.a);
    let ec = max_entry_gap(&c_hat, &model.c);
    out.push(check(
        "Monte-Carlo A and C match the closed form",
        ea < 0.02 && ec < 0.02,
        format!("max |A-Â|={ea:.4} max |C-Ĉ|={ec:.4}"),
    ));

    let mut moved = Vec::new();
    for algo in Algorithm::ALL.into_iter().filter_map(|a| a.step_fn().map(|f| (a, f))) {
        for _ in 0..200 {
            let tr = env.sample_transition(env.initial_state(&mut rng), &mut rng);
            let next = (algo.1)(&LearnerState::zero(), &tr, &StepSizes { alpha: 0.1, beta: 0.1, eta: 1.0, reg: 1.0 }, gamma);
            if next.theta != ZERO_VECTOR || next.w != ZERO_VECTOR {
                moved.push(algo.0.name());
                break;
            }
        }
    }
    out.push(check("zero is a fixed point of every rule", moved.is_empty(), format!("moved: {moved:?}")));

    let theta = baird_core::DEFAULT_THETA0;
    let w = helper_fixed_point(&theta, &model);
    let ode = ode_loss(&w, &theta, &model);
    let n = neu(&theta, &model);
    out.push(check(
        "helper fixed point does not relay to NEU",
        ode < 1e-10 && n > 1.0,
        format!("ode_loss {ode:e} with NEU {n}"),
    ));

    out
}

/// `I − C C⁺`, the projector onto the orthogonal complement of range(C).
pub fn projector_off_range(model: &ExactModel) -> Matrix {
    let cc = linalg::mat_mul(&model.c, model.c_pinv());
    let mut p = linalg::identity();
    linalg::mat_add_scaled(&mut p, -1.0, &cc);
    p
}

pub fn central_difference(f: impl Fn(&Vector) -> f64, x: &Vector, h: f64) -> Vector {
    std::array::from_fn(|i| {
        let mut hi = *x;
        let mut lo = *x;
        hi[i] += h;
        lo[i] -= h;
        (f(&hi) - f(&lo)) / (2.0 * h)
    })
}

/// Sample averages of `ρφ(γφ' − φ)ᵀ` and `φφᵀ` along one behavior chain.
pub fn monte_carlo_model<R: Rng>(env: &BairdEnv, n: usize, rng: &mut R) -> (Matrix, Matrix) {
    let mut a = ZERO_MATRIX;
    let mut c = ZERO_MATRIX;
    let mut s = env.initial_state(rng);
    for _ in 0..n {
        let tr = env.sample_transition(s, rng);
        s = tr.s_next;
        let diff = linalg::sub(&linalg::scale(env.gamma(), &tr.phi_next), &tr.phi);
        linalg::mat_add_scaled(&mut a, tr.rho, &linalg::outer(&tr.phi, &diff));
        linalg::mat_add_scaled(&mut c, 1.0, &linalg::outer(&tr.phi, &tr.phi));
    }
    let k = 1.0 / n as f64;
    (linalg::mat_scale(k, &a), linalg::mat_scale(k, &c))
}

pub fn max_entry_gap(x: &Matrix, y: &Matrix) -> f64 {
    x.iter().flatten().zip(y.iter().flatten()).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
}
