//! Multi-chain random-walk Metropolis–Hastings over the same [`Density`] contract.
//!
//! Used as a reference sampler when judging particle clouds. Chains are not
//! clipped; the bound only sets the initialization box.

use serde::{Deserialize, Serialize};

use crate::engine::Executor;
use crate::error::{Result, SamplerError, ValidationError};
use crate::rng::{RandomStream, StreamDomain};
use crate::target::Density;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MhConfig {
    pub num_chains: usize,
    pub steps: u64,
    pub proposal_std: f64,
    pub burn_in: u64,
    #[serde(default, with = "crate::params::seed_repr")]
    pub seed: u64,
    /// Half-width of the uniform initialization box.
    pub bound: f64,
    /// Keep every `thin`-th post-burn-in state per chain; 0 keeps only final states.
    #[serde(default)]
    pub thin: u64,
}

impl MhConfig {
    pub fn validate(&self) -> Result<(), ValidationError> {
        let fail = |key: &str, what: &str| Err(ValidationError::new(key, format!("{key} must be {what}")));
        if self.num_chains == 0 {
            return fail("num_chains", "positive");
        }
        if self.steps == 0 {
            return fail("steps", "positive");
        }
        if !(self.proposal_std > 0.0 && self.proposal_std.is_finite()) {
            return fail("proposal_std", "positive and finite");
        }
        if self.burn_in >= self.steps {
            return fail("burn_in", "less than steps");
        }
        if !(self.bound > 0.0 && self.bound.is_finite()) {
            return fail("bound", "positive and finite");
        }
        Ok(())
    }
}

/// Outcome of one Metropolis–Hastings transition.
#[derive(Debug, Clone, PartialEq)]
pub struct MhTransition {
    pub state: Vec<f64>,
    pub accepted: bool,
}

/// Samples returned by [`mh_run`].
#[derive(Debug, Clone, PartialEq)]
pub struct MhSamples {
    /// Final state of every chain, in chain order.
    pub finals: Vec<Vec<f64>>,
    /// Thinned post-burn-in states, chain-major; empty when `thin == 0`.
    pub thinned: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
}

fn density_at<D: Density + ?Sized>(target: &D, x: &[f64], stream: &RandomStream) -> Result<f64> {
    let value = target.eval(x);
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(SamplerError::InvalidDensity {
            particle: stream.index(),
            iteration: stream.iteration(),
            value,
        })
    }
}

/// Propose `x' = x + N(0, s² I)` and accept with probability `min(1, p̃(x')/p̃(x))`.
///
/// From a zero-density state every proposal is accepted. Each call draws
/// `d` proposal variates followed by one uniform.
pub fn mh_step<D: Density + ?Sized>(
    x: &[f64],
    target: &D,
    proposal_std: f64,
    stream: &mut RandomStream,
) -> Result<MhTransition> {
    if x.len() != target.dim() {
        return Err(SamplerError::DimensionMismatch { expected: target.dim(), actual: x.len() });
    }
    let proposal: Vec<f64> = x
        .iter()
        .map(|xi| xi + proposal_std * stream.standard_normal())
        .collect();
    let u = stream.unit();
    let current = density_at(target, x, stream)?;
    let proposed = density_at(target, &proposal, stream)?;
    let accepted = current == 0.0 || u < proposed / current;
    Ok(if accepted {
        MhTransition { state: proposal, accepted }
    } else {
        MhTransition { state: x.to_vec(), accepted }
    })
}

pub fn mh_run<D: Density + ?Sized>(cfg: &MhConfig, target: &D) -> Result<MhSamples> {
    mh_run_with(cfg, target, &Executor::default())
}

/// Run all chains on `exec`. Chain `c` initializes from stream `(seed, Chain, c, 0)`
/// and takes step `t` from stream `(seed, Chain, c, t)`.
pub fn mh_run_with<D: Density + ?Sized>(cfg: &MhConfig, target: &D, exec: &Executor) -> Result<MhSamples> {
    cfg.validate()?;
    let d = target.dim();
    let chains = exec.map_indices(cfg.num_chains, |c| -> Result<(Vec<f64>, Vec<Vec<f64>>, u64)> {
        let mut init = RandomStream::new(cfg.seed, StreamDomain::Chain, c, 0);
        let mut x: Vec<f64> = (0..d).map(|_| init.uniform(-cfg.bound, cfg.bound)).collect();
        let mut kept = Vec::new();
        let mut accepted = 0;
        for t in 1..=cfg.steps {
            let mut stream = RandomStream::new(cfg.seed, StreamDomain::Chain, c, t);
            let step = mh_step(&x, target, cfg.proposal_std, &mut stream)?;
            accepted += u64::from(step.accepted);
            x = step.state;
            if cfg.thin > 0 && t > cfg.burn_in && (t - cfg.burn_in) % cfg.thin == 0 {
                kept.push(x.clone());
            }
        }
        Ok((x, kept, accepted))
    });

    let mut finals = Vec::with_capacity(cfg.num_chains);
    let mut thinned = Vec::new();
    let mut accepted = 0;
    for chain in chains {
        let (x, kept, acc) = chain?;
        finals.push(x);
        thinned.extend(kept);
        accepted += acc;
    }
    Ok(MhSamples {
        finals,
        thinned,
        acceptance_rate: accepted as f64 / (cfg.num_chains as u64 * cfg.steps) as f64,
    })
}
