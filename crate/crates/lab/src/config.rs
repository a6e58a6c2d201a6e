//! Experiment configuration and its JSON file format.
//!
//! Config files must spell out every field; unknown keys are rejected.

use std::fs;
use std::path::Path;

use baird_core::linalg::ZERO_VECTOR;
use baird_core::{Algorithm, StepSizes, Vector, DEFAULT_GAMMA, DEFAULT_THETA0};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::{ConfigError, LabError};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(with = "algo_name")]
    pub algo: Algorithm,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub reg: f64,
    pub gamma: f64,
    pub theta0: Vector,
    pub w0: Vector,
    pub steps: u64,
    pub runs: u32,
    pub seed: u64,
    pub batch: usize,
    pub warmup: usize,
    /// `null` keeps the whole history.
    #[serde(deserialize_with = "Option::deserialize")]
    pub buffer_capacity: Option<usize>,
    pub log_every: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algo: Algorithm::Tdc,
            alpha: 0.005,
            beta: 0.05,
            eta: 1.0,
            reg: 1.0,
            gamma: DEFAULT_GAMMA,
            theta0: DEFAULT_THETA0,
            w0: ZERO_VECTOR,
            steps: 1_000,
            runs: 50,
            seed: 0,
            batch: 10,
            warmup: 100,
            buffer_capacity: None,
            log_every: 10,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        for (field, value) in [("steps", self.steps), ("runs", self.runs as u64), ("log_every", self.log_every)] {
            if value == 0 {
                return Err(ConfigError::NotPositive { field });
            }
        }
        if self.algo == Algorithm::ImpressionGtd && self.batch == 0 {
            return Err(ConfigError::NotPositive { field: "batch" });
        }
        let scalars = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("eta", self.eta),
            ("reg", self.reg),
            ("gamma", self.gamma),
        ];
        let vectors = self.theta0.iter().map(|v| ("theta0", *v)).chain(self.w0.iter().map(|v| ("w0", *v)));
        for (field, value) in scalars.into_iter().chain(vectors) {
            if !value.is_finite() {
                return Err(ConfigError::NotFinite { field, value });
            }
        }
        for (field, value) in &scalars[..4] {
            if *value < 0.0 {
                return Err(ConfigError::Negative { field, value: *value });
            }
        }
        if !(0.0..1.0).contains(&self.gamma) {
            return Err(ConfigError::Gamma(self.gamma));
        }
        Ok(())
    }

    pub fn step_sizes(&self) -> StepSizes {
        StepSizes { alpha: self.alpha, beta: self.beta, eta: self.eta, reg: self.reg }
    }

    /// First 16 hex digits of the SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub fn read_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, LabError> {
    read_json(path.as_ref())
}

pub fn write_config(config: &ExperimentConfig, path: impl AsRef<Path>) -> Result<(), LabError> {
    let path = path.as_ref();
    fs::write(path, config.to_json_pretty() + "\n").map_err(|e| LabError::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| LabError::Parse { path: path.to_owned(), source })
}

mod algo_name {
    use super::*;

    pub fn serialize<S: Serializer>(algo: &Algorithm, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(algo.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Algorithm, D::Error> {
        let name = String::deserialize(d)?;
        name.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let c = ExperimentConfig {
            algo: Algorithm::ImpressionGtd,
            alpha: 0.1 + 0.2,
            buffer_capacity: Some(500),
            seed: u64::MAX,
            ..Default::default()
        };
        let back = ExperimentConfig::from_json(&c.to_json_pretty()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.fingerprint(), c.fingerprint());
    }

    #[test]
    fn unknown_key_is_rejected() {
        let mut v: serde_json::Value = serde_json::to_value(ExperimentConfig::default()).unwrap();
        v["lambda"] = serde_json::json!(0.5);
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("unknown field `lambda`"), "{err}");
    }

    #[test]
    fn missing_key_is_rejected() {
        for key in ["alpha", "buffer_capacity"] {
            let mut v: serde_json::Value = serde_json::to_value(ExperimentConfig::default()).unwrap();
            v.as_object_mut().unwrap().remove(key);
            let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
            assert!(err.contains(&format!("missing field `{key}`")), "{err}");
        }
    }

    #[test]
    fn parse_error_names_line() {
        let err = ExperimentConfig::from_json("{\n  \"algo\": \"tdc\",\n  \"alpha\": oops\n}").unwrap_err();
        assert_eq!(err.line(), 3);
    }

    #[test]
    fn bad_algo_name() {
        let mut v: serde_json::Value = serde_json::to_value(ExperimentConfig::default()).unwrap();
        v["algo"] = serde_json::json!("sarsa");
        let err = ExperimentConfig::from_json(&v.to_string()).unwrap_err().to_string();
        assert!(err.contains("unknown algorithm `sarsa`"), "{err}");
    }

    #[test]
    fn validation() {
        assert!(ExperimentConfig::default().validate().is_ok());
        let cases: [fn(&mut ExperimentConfig); 6] = [
            |c| c.steps = 0,
            |c| c.runs = 0,
            |c| c.log_every = 0,
            |c| c.gamma = 1.0,
            |c| c.alpha = f64::NAN,
            |c| c.theta0[3] = f64::INFINITY,
        ];
        for mutate in cases {
            let mut c = ExperimentConfig::default();
            mutate(&mut c);
            assert!(c.validate().is_err(), "{c:?}");
        }
    }
}
