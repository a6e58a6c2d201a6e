//! The Baird counterexample: seven states, two arrow kinds, eight features.
//!
//! States and feature components are numbered from 1 in every public
//! interface, so "state 7" is the lower state everywhere.

use rand::Rng;

use crate::linalg::{self, Matrix, SymmetricEigen, Vector, ZERO_MATRIX, ZERO_VECTOR};
use crate::{Error, NUM_STATES};

/// Relative eigenvalue cutoff used for ranks and the pseudo-inverse of `C`.
pub const EIGEN_CUTOFF: f64 = 1e-10;

/// A state id in `1..=7`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(u8);

impl State {
    pub const LOWER: State = State(7);

    pub fn new(id: usize) -> Result<Self, Error> {
        if (1..=NUM_STATES).contains(&id) {
            Ok(State(id as u8))
        } else {
            Err(Error::InvalidState(id))
        }
    }

    pub fn id(self) -> usize {
        self.0 as usize
    }

    /// Zero-based row index into per-state arrays.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn is_upper(self) -> bool {
        self.0 < 7
    }

    pub fn all() -> impl Iterator<Item = State> {
        (1..=NUM_STATES as u8).map(State)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// Always leads to state 7.
    Solid,
    /// Leads to one of the six upper states uniformly.
    Dashed,
}

/// Probability with which the behavior policy picks the solid arrow.
pub const BEHAVIOR_P_SOLID: f64 = 1.0 / 7.0;
/// The target policy always picks the solid arrow.
pub const TARGET_P_SOLID: f64 = 1.0;

fn action_prob(p_solid: f64, action: Action) -> f64 {
    match action {
        Action::Solid => p_solid,
        Action::Dashed => 1.0 - p_solid,
    }
}

/// π(a)/b(a) for the standard target/behavior pair: 7 for solid, 0 for dashed.
pub fn importance_ratio(action: Action) -> f64 {
    action_prob(TARGET_P_SOLID, action) / action_prob(BEHAVIOR_P_SOLID, action)
}

/// Rows are `2·e_s + e_8` for the six upper states and `e_7 + 2·e_8` for the
/// lower one.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureBasis {
    rows: [Vector; NUM_STATES],
}

impl FeatureBasis {
    pub const BAIRD: FeatureBasis = FeatureBasis {
        rows: [
            [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 2.0],
        ],
    };

    pub fn phi(&self, s: State) -> &Vector {
        &self.rows[s.index()]
    }

    pub fn rows(&self) -> &[Vector; NUM_STATES] {
        &self.rows
    }

    pub fn value(&self, s: State, theta: &Vector) -> f64 {
        linalg::dot(self.phi(s), theta)
    }

    /// `Φθ`, indexed by zero-based state.
    pub fn values(&self, theta: &Vector) -> [f64; NUM_STATES] {
        core::array::from_fn(|i| linalg::dot(&self.rows[i], theta))
    }
}

/// Feature vector of state `s` (1-based).
pub fn feature_vector(s: usize) -> Result<Vector, Error> {
    Ok(*FeatureBasis::BAIRD.phi(State::new(s)?))
}

/// True value of every state under the target policy; all rewards are zero.
pub fn true_values() -> [f64; NUM_STATES] {
    [0.0; NUM_STATES]
}

/// One behavior-policy step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub s: State,
    pub action: Action,
    pub s_next: State,
    pub r: f64,
    pub phi: Vector,
    pub phi_next: Vector,
    pub rho: f64,
}

impl Transition {
    /// Sampled TD error `r + γ φ'ᵀθ − φᵀθ`.
    #[inline]
    pub fn td_error(&self, theta: &Vector, gamma: f64) -> f64 {
        self.r + gamma * linalg::dot(&self.phi_next, theta) - linalg::dot(&self.phi, theta)
    }
}

#[derive(Clone, Debug)]
pub struct BairdEnv {
    gamma: f64,
    basis: FeatureBasis,
    p_solid_behavior: f64,
    p_solid_target: f64,
}

impl BairdEnv {
    pub fn new(gamma: f64) -> Result<Self, Error> {
        check_discount(gamma)?;
        Ok(BairdEnv {
            gamma,
            basis: FeatureBasis::BAIRD,
            p_solid_behavior: BEHAVIOR_P_SOLID,
            p_solid_target: TARGET_P_SOLID,
        })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn basis(&self) -> &FeatureBasis {
        &self.basis
    }

    pub fn p_solid_behavior(&self) -> f64 {
        self.p_solid_behavior
    }

    pub fn p_solid_target(&self) -> f64 {
        self.p_solid_target
    }

    pub fn importance_ratio(&self, action: Action) -> f64 {
        action_prob(self.p_solid_target, action) / action_prob(self.p_solid_behavior, action)
    }

    /// Uniformly random start state for a fresh chain.
    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> State {
        State(rng.gen_range(1..=NUM_STATES as u8))
    }

    pub fn sample_action<R: Rng + ?Sized>(&self, rng: &mut R) -> Action {
        if rng.gen::<f64>() < self.p_solid_behavior {
            Action::Solid
        } else {
            Action::Dashed
        }
    }

    /// Completes a step from `s` once the action is fixed; only the dashed
    /// arrow consumes randomness.
    pub fn step_with<R: Rng + ?Sized>(&self, s: State, action: Action, rng: &mut R) -> Transition {
        let s_next = match action {
            Action::Solid => State::LOWER,
            Action::Dashed => State(rng.gen_range(1..=6)),
        };
        Transition {
            s,
            action,
            s_next,
            r: 0.0,
            phi: *self.basis.phi(s),
            phi_next: *self.basis.phi(s_next),
            rho: self.importance_ratio(action),
        }
    }

    pub fn sample_transition<R: Rng + ?Sized>(&self, s: State, rng: &mut R) -> Transition {
        let action = self.sample_action(rng);
        self.step_with(s, action, rng)
    }

    /// Behavior-policy state transition matrix (zero-based indices).
    pub fn behavior_kernel(&self) -> [[f64; NUM_STATES]; NUM_STATES] {
        let p_upper = (1.0 - self.p_solid_behavior) / 6.0;
        core::array::from_fn(|_| {
            core::array::from_fn(|j| if j == NUM_STATES - 1 { self.p_solid_behavior } else { p_upper })
        })
    }

    /// Stationary distribution of the behavior chain by power iteration.
    pub fn stationary_distribution(&self) -> [f64; NUM_STATES] {
        let p = self.behavior_kernel();
        let mut mu = [0.0; NUM_STATES];
        mu[0] = 1.0;
        for _ in 0..10_000 {
            let next: [f64; NUM_STATES] =
                core::array::from_fn(|j| (0..NUM_STATES).map(|i| mu[i] * p[i][j]).sum());
            let gap = next
                .iter()
                .zip(&mu)
                .fold(0.0_f64, |m, (a, b)| m.max(libm::fabs(a - b)));
            mu = next;
            if gap < 1e-15 {
                break;
            }
        }
        let total: f64 = mu.iter().sum();
        mu.map(|m| m / total)
    }

    pub fn exact_model(&self) -> ExactModel {
        ExactModel::build(self)
    }
}

fn check_discount(gamma: f64) -> Result<(), Error> {
    if (0.0..1.0).contains(&gamma) {
        Ok(())
    } else {
        Err(Error::InvalidDiscount(gamma))
    }
}

/// Closed-form expectations `A = E[ρφ(γφ' − φ)ᵀ]`, `b = E[ρrφ]`,
/// `C = E[φφᵀ]` under the behavior stationary distribution.
#[derive(Clone, Debug)]
pub struct ExactModel {
    pub a: Matrix,
    pub b: Vector,
    pub c: Matrix,
    pub mu: [f64; NUM_STATES],
    pub gamma: f64,
    c_eigen: SymmetricEigen,
    c_pinv: Matrix,
}

impl ExactModel {
    pub fn new(gamma: f64) -> Result<Self, Error> {
        Ok(BairdEnv::new(gamma)?.exact_model())
    }

    fn build(env: &BairdEnv) -> Self {
        let gamma = env.gamma;
        let mu = env.stationary_distribution();
        let basis = &env.basis;
        // the target policy always moves to state 7
        let phi_target_next = basis.phi(State::LOWER);
        let mut a = ZERO_MATRIX;
        let mut c = ZERO_MATRIX;
        for s in State::all() {
            let phi = basis.phi(s);
            let w = mu[s.index()];
            let diff = linalg::sub(&linalg::scale(gamma, phi_target_next), phi);
            linalg::mat_add_scaled(&mut a, w, &linalg::outer(phi, &diff));
            linalg::mat_add_scaled(&mut c, w, &linalg::outer(phi, phi));
        }
        let c_eigen = SymmetricEigen::new(&c);
        let c_pinv = c_eigen.pseudo_inverse(EIGEN_CUTOFF);
        ExactModel { a, b: ZERO_VECTOR, c, mu, gamma, c_eigen, c_pinv }
    }

    /// Expected TD update direction `Aθ + b`.
    pub fn expected_update(&self, theta: &Vector) -> Vector {
        linalg::add(&linalg::mat_vec(&self.a, theta), &self.b)
    }

    pub fn c_pinv(&self) -> &Matrix {
        &self.c_pinv
    }

    /// Eigenvalues of `C`, ascending.
    pub fn c_eigenvalues(&self) -> &Vector {
        &self.c_eigen.values
    }

    /// Unit vector spanning the null space of `C`.
    pub fn c_null_vector(&self) -> Vector {
        self.c_eigen.vectors[0]
    }

    pub fn rank_c(&self) -> usize {
        self.c_eigen.rank(EIGEN_CUTOFF)
    }

    pub fn rank_a(&self) -> usize {
        linalg::rank(&self.a, EIGEN_CUTOFF)
    }
}
