//! Seeded multi-run execution of one configuration.

use baird_core::algorithms::impression_gtd_step;
use baird_core::linalg::max_abs;
use baird_core::{snapshot, BairdEnv, ExactModel, LearnerState, MetricsRecord, ReplayBuffer};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::ConfigError;
use crate::seeding::{child_seed, run_rng};

/// A run stops and is flagged as diverged once any `|θ_i|` exceeds this.
pub const DIVERGENCE_GUARD: f64 = 1e8;

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub run_id: u32,
    pub seed: u64,
    pub fingerprint: String,
    /// Strictly increasing in `step`. Row `t` holds `(θ_t, w_t)` before the
    /// `t`-th update.
    pub records: Vec<MetricsRecord>,
    pub diverged: bool,
}

impl RunLog {
    pub fn last(&self) -> &MetricsRecord {
        self.records.last().expect("a run logs at least step 0")
    }

    pub fn at_step(&self, step: u64) -> Option<&MetricsRecord> {
        self.records
            .binary_search_by_key(&step, |r| r.step)
            .ok()
            .map(|i| &self.records[i])
    }
}

/// Runs every seeded repetition of `config`. Output order is by `run_id`
/// regardless of how runs are scheduled.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<RunLog>, ConfigError> {
    config.validate()?;
    let model = ExactModel::new(config.gamma)?;
    let fingerprint = config.fingerprint();
    Ok((0..config.runs)
        .into_par_iter()
        .map(|k| run_single(config, &model, &fingerprint, k))
        .collect())
}

/// One run. `config` must already be validated and `model` built for its
/// discount.
pub fn run_single(config: &ExperimentConfig, model: &ExactModel, fingerprint: &str, run_id: u32) -> RunLog {
    let seed = child_seed(config.seed, run_id as u64);
    let mut rng = run_rng(seed);
    let env = BairdEnv::new(config.gamma).expect("validated discount");
    let gamma = config.gamma;
    let sizes = config.step_sizes();
    let step_fn = config.algo.step_fn();
    let ready_at = config.warmup.max(2 * config.batch);
    let mut buffer = match config.buffer_capacity {
        Some(cap) => ReplayBuffer::with_capacity(cap),
        None => ReplayBuffer::unbounded(),
    };

    let mut learner = LearnerState::new(config.theta0, config.w0);
    let mut s = env.initial_state(&mut rng);
    let mut records = Vec::with_capacity((config.steps / config.log_every) as usize + 2);
    let mut diverged = false;

    for t in 0..config.steps {
        if t % config.log_every == 0 {
            records.push(snapshot(&learner.theta, &learner.w, t, model));
        }
        let tr = env.sample_transition(s, &mut rng);
        s = tr.s_next;
        learner = match step_fn {
            Some(step) => step(&learner, &tr, &sizes, gamma),
            None => {
                buffer.push(tr);
                if buffer.len() >= ready_at {
                    impression_gtd_step(&learner, &buffer, &sizes, config.batch, gamma, &mut rng)
                        .expect("buffer is past warmup")
                } else {
                    learner
                }
            }
        };
        let size = max_abs(&learner.theta);
        if size.is_nan() || size > DIVERGENCE_GUARD {
            diverged = true;
            records.push(snapshot(&learner.theta, &learner.w, t + 1, model));
            break;
        }
    }
    if !diverged {
        records.push(snapshot(&learner.theta, &learner.w, config.steps, model));
    }

    RunLog { run_id, seed, fingerprint: fingerprint.to_owned(), records, diverged }
}

#[cfg(test)]
mod tests {
    use super::*;
    use baird_core::linalg::ZERO_VECTOR;
    use baird_core::Algorithm;

    fn small(algo: Algorithm) -> ExperimentConfig {
        ExperimentConfig { algo, steps: 200, runs: 3, log_every: 10, ..Default::default() }
    }

    #[test]
    fn zero_start_stays_zero() {
        for algo in Algorithm::ALL {
            let c = ExperimentConfig { theta0: ZERO_VECTOR, ..small(algo) };
            for log in run_experiment(&c).unwrap() {
                assert!(log.records.iter().all(|r| r.rmsve == 0.0), "{algo}");
            }
        }
    }

    #[test]
    fn deterministic() {
        for algo in Algorithm::ALL {
            let c = small(algo);
            assert_eq!(run_experiment(&c).unwrap(), run_experiment(&c).unwrap());
        }
    }

    #[test]
    fn step_grid() {
        let logs = run_experiment(&ExperimentConfig { steps: 95, ..small(Algorithm::Tdc) }).unwrap();
        let steps: Vec<u64> = logs[0].records.iter().map(|r| r.step).collect();
        assert_eq!(steps, vec![0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95]);
        assert_eq!(logs[0].records[0].theta, baird_core::DEFAULT_THETA0);
    }

    #[test]
    fn seed_isolation() {
        let c = small(Algorithm::Gtd);
        let model = ExactModel::new(c.gamma).unwrap();
        let all = run_experiment(&c).unwrap();
        for k in [2, 0, 1] {
            assert_eq!(run_single(&c, &model, &c.fingerprint(), k), all[k as usize]);
        }
    }

    #[test]
    fn impression_waits_for_warmup() {
        let c = ExperimentConfig { algo: Algorithm::ImpressionGtd, alpha: 0.01, warmup: 100, ..small(Algorithm::Tdc) };
        let log = &run_experiment(&c).unwrap()[0];
        let early = log.at_step(90).unwrap();
        assert_eq!(early.theta, c.theta0);
        assert_ne!(log.at_step(200).unwrap().theta, c.theta0);
    }

    #[test]
    fn divergence_is_flagged() {
        let c = ExperimentConfig { algo: Algorithm::Td0, alpha: 5.0, steps: 10_000, runs: 2, ..Default::default() };
        for log in run_experiment(&c).unwrap() {
            assert!(log.diverged);
            assert!(log.last().step < 10_000);
            assert!(log.records.windows(2).all(|w| w[0].step < w[1].step));
        }
    }

    #[test]
    fn invalid_config_fails_before_running() {
        let c = ExperimentConfig { gamma: 1.5, ..Default::default() };
        assert!(run_experiment(&c).is_err());
    }
}
