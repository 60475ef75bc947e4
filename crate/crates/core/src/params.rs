//! Run constants and their validation.

use serde::{Deserialize, Serialize};

use crate::error::ValidationError;

pub const DEFAULT_ALPHA: f64 = 0.6;
pub const DEFAULT_ETA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_GAMMA: f64 = 0.9;
pub const DEFAULT_PERTURB_STD: f64 = 0.1;
pub const DEFAULT_SEED: u64 = 0;

/// Unvalidated hyperparameters as they arrive from a config file or caller.
///
/// `num_particles`, `dim`, `num_iterations` and `bound` are required; every
/// other key falls back to its default. The short names `M`, `d`, `T`, `L`
/// are accepted as aliases.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HyperparameterInput {
    #[serde(alias = "M", skip_serializing_if = "Option::is_none")]
    pub num_particles: Option<usize>,
    #[serde(alias = "d", skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(alias = "T", skip_serializing_if = "Option::is_none")]
    pub num_iterations: Option<u64>,
    #[serde(alias = "L", skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub perturb_std: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "seed_repr::optional")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_trajectory: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cheap_history: Option<bool>,
}

impl HyperparameterInput {
    /// Required keys only; everything else defaulted.
    pub fn new(num_particles: usize, dim: usize, num_iterations: u64, bound: f64) -> Self {
        Self {
            num_particles: Some(num_particles),
            dim: Some(dim),
            num_iterations: Some(num_iterations),
            bound: Some(bound),
            ..Self::default()
        }
    }

    /// Names of all accepted keys, canonical spelling first.
    pub const KEYS: &'static [&'static str] = &[
        "num_particles",
        "dim",
        "num_iterations",
        "bound",
        "alpha",
        "eta",
        "epsilon",
        "gamma",
        "perturb_std",
        "seed",
        "record_trajectory",
        "cheap_history",
        "M",
        "d",
        "T",
        "L",
    ];

    pub fn validate(&self) -> Result<Hyperparameters, ValidationError> {
        validate_hyperparameters(self)
    }
}

/// Validated run constants. Construct through [`validate_hyperparameters`].
///
/// `beta` is always `1 - alpha`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperparameters {
    num_particles: usize,
    dim: usize,
    num_iterations: u64,
    alpha: f64,
    beta: f64,
    eta: f64,
    epsilon: f64,
    gamma: f64,
    perturb_std: f64,
    bound: f64,
    seed: u64,
    record_trajectory: bool,
    cheap_history: bool,
}

fn require<T>(value: Option<T>, key: &str) -> Result<T, ValidationError> {
    value.ok_or_else(|| ValidationError::missing(key))
}

fn check(ok: bool, key: &str, what: &str) -> Result<(), ValidationError> {
    if ok {
        Ok(())
    } else {
        Err(ValidationError::new(key, format!("{key} must be {what}")))
    }
}

fn check_real(value: f64, key: &str, ok: bool, what: &str) -> Result<f64, ValidationError> {
    check(value.is_finite() && ok, key, what)?;
    Ok(value)
}

/// Apply defaults and range-check every field.
pub fn validate_hyperparameters(
    raw: &HyperparameterInput,
) -> Result<Hyperparameters, ValidationError> {
    let num_particles = require(raw.num_particles, "num_particles")?;
    check(num_particles > 0, "num_particles", "positive")?;
    let dim = require(raw.dim, "dim")?;
    check(dim > 0, "dim", "positive")?;
    let num_iterations = require(raw.num_iterations, "num_iterations")?;
    let bound = require(raw.bound, "bound")?;
    check_real(bound, "bound", bound > 0.0, "positive and finite")?;

    let alpha = raw.alpha.unwrap_or(DEFAULT_ALPHA);
    check_real(alpha, "alpha", (0.0..=1.0).contains(&alpha), "in [0, 1]")?;
    let eta = raw.eta.unwrap_or(DEFAULT_ETA);
    check_real(eta, "eta", eta > 0.0, "positive and finite")?;
    let epsilon = raw.epsilon.unwrap_or(DEFAULT_EPSILON);
    check_real(epsilon, "epsilon", epsilon >= 0.0, "nonnegative and finite")?;
    let gamma = raw.gamma.unwrap_or(DEFAULT_GAMMA);
    check_real(gamma, "gamma", (0.0..1.0).contains(&gamma), "in [0, 1)")?;
    let perturb_std = raw.perturb_std.unwrap_or(DEFAULT_PERTURB_STD);
    check_real(
        perturb_std,
        "perturb_std",
        perturb_std > 0.0,
        "positive and finite",
    )?;

    Ok(Hyperparameters {
        num_particles,
        dim,
        num_iterations,
        alpha,
        beta: 1.0 - alpha,
        eta,
        epsilon,
        gamma,
        perturb_std,
        bound,
        seed: raw.seed.unwrap_or(DEFAULT_SEED),
        record_trajectory: raw.record_trajectory.unwrap_or(false),
        cheap_history: raw.cheap_history.unwrap_or(false),
    })
}

impl Hyperparameters {
    pub fn num_particles(&self) -> usize {
        self.num_particles
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn num_iterations(&self) -> u64 {
        self.num_iterations
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn perturb_std(&self) -> f64 {
        self.perturb_std
    }
    pub fn bound(&self) -> f64 {
        self.bound
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn record_trajectory(&self) -> bool {
        self.record_trajectory
    }
    /// Reuse the probe reward `R(x')` for the history instead of evaluating `R(x_new)`.
    pub fn cheap_history(&self) -> bool {
        self.cheap_history
    }

    pub fn weights(&self) -> crate::reward::RewardWeights {
        crate::reward::RewardWeights::from_alpha(self.alpha)
            .expect("alpha validated at construction")
    }

    /// Fully-populated input that validates back to `self`.
    pub fn to_input(&self) -> HyperparameterInput {
        HyperparameterInput {
            num_particles: Some(self.num_particles),
            dim: Some(self.dim),
            num_iterations: Some(self.num_iterations),
            bound: Some(self.bound),
            alpha: Some(self.alpha),
            eta: Some(self.eta),
            epsilon: Some(self.epsilon),
            gamma: Some(self.gamma),
            perturb_std: Some(self.perturb_std),
            seed: Some(self.seed),
            record_trajectory: Some(self.record_trajectory),
            cheap_history: Some(self.cheap_history),
        }
    }

    /// Copy with a different seed.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Seeds span the full `u64` range, but formats such as TOML only carry
/// signed 64-bit integers. Values above `i64::MAX` are written as decimal
/// strings; either form is accepted on input.
pub mod seed_repr {
    use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(u64),
        Text(String),
    }

    fn from_repr<E: de::Error>(r: Repr) -> Result<u64, E> {
        match r {
            Repr::Int(v) => Ok(v),
            Repr::Text(s) => s
                .parse()
                .map_err(|_| E::custom(format!("seed must be an unsigned 64-bit integer, got {s:?}"))),
        }
    }

    pub fn serialize<S: Serializer>(seed: &u64, s: S) -> Result<S::Ok, S::Error> {
        match i64::try_from(*seed) {
            Ok(v) => v.serialize(s),
            Err(_) => seed.to_string().serialize(s),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        from_repr(Repr::deserialize(d)?)
    }

    pub mod optional {
        use super::*;

        pub fn serialize<S: Serializer>(seed: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
            match seed {
                Some(v) => super::serialize(v, s),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
            Option::<Repr>::deserialize(d)?.map(from_repr).transpose()
        }
    }
}
