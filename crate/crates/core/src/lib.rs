//! Reward-guided, gradient-free particle sampling for unnormalized densities.
//!
//! A cloud of particles starts uniform in a box and drifts toward regions of
//! high reward `R(x) = α·p̃(x) − β·p̃(x) ln p̃(x)`. Each particle probes a
//! random nearby point; an improving probe nudges its velocity toward the
//! probe, a non-improving one damps the velocity. Gaussian exploration noise
//! is added on every move and positions are clipped to `[-L, L]^d`.
//!
//! ```
//! use rparvi::{run, HyperparameterInput, TargetDensity};
//!
//! let hp = HyperparameterInput::new(64, 1, 100, 5.0).validate().unwrap();
//! let result = run(&hp, &TargetDensity::standard_gaussian(1)).unwrap();
//! assert_eq!(result.history.len(), 100);
//! ```
//!
//! Particle updates run on rayon when the `parallel` feature (on by default)
//! is enabled. Output does not depend on the worker count.

pub mod baseline_mh;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod params;
pub mod particles;
pub mod reward;
pub mod rng;
pub mod target;

pub use baseline_mh::{mh_run, mh_run_with, mh_step, MhConfig, MhSamples, MhTransition};
pub use engine::{run, run_with, step_particle, step_system, Executor, RewardHistory, RunResult, StepOutcome};
pub use error::{SamplerError, ValidationError};
pub use metrics::{
    kde_1d, ks_statistic_1d, mmd_squared, mode_occupancy, sample_moments, KdeBandwidth, MetricsReport,
    MmdBandwidth,
};
pub use params::{validate_hyperparameters, HyperparameterInput, Hyperparameters};
pub use particles::{clip_position, init_particles, ParticleSystem};
pub use reward::{entropy_term, reward, RewardWeights};
pub use rng::{RandomStream, StreamDomain};
pub use target::{Density, MixtureComponent, MixtureSpec, TargetDensity};
