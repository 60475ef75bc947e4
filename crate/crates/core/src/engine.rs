//! The reward-guided particle update loop.
//!
//! One iteration, per particle:
//!
//! 1. draw a probe `δ ~ N(0, σ_δ² I)` and compare `R(x + δ)` against `R(x)`;
//! 2. on strict improvement `v ← v + η δ`, otherwise `v ← γ v`;
//! 3. draw exploration noise `e ~ N(0, ε² I)` and set `x ← clip(x + v + e, L)`.
//!
//! Particles never interact inside an iteration, so the update is a parallel
//! map followed by a mean-reward reduction. The reduction always sums in
//! particle order, and every particle reads its own keyed [`RandomStream`],
//! so results are bit-identical for any worker count.

use crate::error::{Result, SamplerError};
use crate::metrics::MetricsReport;
use crate::params::Hyperparameters;
use crate::particles::{clip_in_place, init_particles, ParticleSystem};
use crate::reward::{reward, RewardWeights};
use crate::rng::RandomStream;
use crate::target::Density;

/// Result of updating one particle for one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub accepted: bool,
    pub new_position: Vec<f64>,
    pub new_velocity: Vec<f64>,
    /// `R(x_new)`, or `R(x')` when `cheap_history` is set.
    pub reward_at_new_position: f64,
}

/// Per-iteration mean rewards, one entry per completed iteration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RewardHistory {
    mean_rewards: Vec<f64>,
}

impl RewardHistory {
    pub fn mean_rewards(&self) -> &[f64] {
        &self.mean_rewards
    }

    pub fn len(&self) -> usize {
        self.mean_rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean_rewards.is_empty()
    }

    /// Average of the first `n` entries.
    pub fn head_mean(&self, n: usize) -> Option<f64> {
        window_mean(self.mean_rewards.get(..n)?)
    }

    /// Average of the last `n` entries.
    pub fn tail_mean(&self, n: usize) -> Option<f64> {
        let start = self.mean_rewards.len().checked_sub(n)?;
        window_mean(&self.mean_rewards[start..])
    }

    fn push(&mut self, value: f64) {
        self.mean_rewards.push(value);
    }
}

fn window_mean(w: &[f64]) -> Option<f64> {
    (!w.is_empty()).then(|| w.iter().sum::<f64>() / w.len() as f64)
}

/// Everything a completed run returns.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub final_system: ParticleSystem,
    pub history: RewardHistory,
    /// Row-major `M×d` positions after each iteration, when requested.
    pub trajectory: Option<Vec<Vec<f64>>>,
    pub metrics_summary: Option<MetricsReport>,
}

/// How particle updates are scheduled within an iteration.
pub struct Executor {
    #[cfg(feature = "parallel")]
    pool: Option<Option<rayon::ThreadPool>>,
}

impl std::fmt::Debug for Executor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Executor")
            .field("parallel", &self.is_parallel())
            .finish()
    }
}

impl Default for Executor {
    fn default() -> Self {
        Self::parallel(0).unwrap_or_else(|_| Self::sequential())
    }
}

impl Executor {
    pub fn sequential() -> Self {
        Self {
            #[cfg(feature = "parallel")]
            pool: None,
        }
    }

    /// Data-parallel executor with `workers` threads; 0 uses the global rayon pool.
    ///
    /// Without the `parallel` feature this is the sequential executor.
    pub fn parallel(workers: usize) -> Result<Self> {
        #[cfg(feature = "parallel")]
        {
            let pool = if workers == 0 {
                None
            } else {
                Some(
                    rayon::ThreadPoolBuilder::new()
                        .num_threads(workers)
                        .build()
                        .map_err(|e| SamplerError::Metric(format!("thread pool: {e}")))?,
                )
            };
            Ok(Self { pool: Some(pool) })
        }
        #[cfg(not(feature = "parallel"))]
        {
            let _ = workers;
            Ok(Self::sequential())
        }
    }

    pub fn is_parallel(&self) -> bool {
        #[cfg(feature = "parallel")]
        {
            self.pool.is_some()
        }
        #[cfg(not(feature = "parallel"))]
        {
            false
        }
    }

    /// Apply `f(index, x, v)` to each particle row and collect results in particle order.
    pub(crate) fn map_rows<F, T>(&self, positions: &mut [f64], velocities: &mut [f64], dim: usize, f: F) -> Vec<T>
    where
        F: Fn(usize, &mut [f64], &mut [f64]) -> T + Sync + Send,
        T: Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            let mut job = move || {
                positions
                    .par_chunks_mut(dim)
                    .zip(velocities.par_chunks_mut(dim))
                    .enumerate()
                    .map(|(p, (x, v))| f(p, x, v))
                    .collect()
            };
            return match pool {
                Some(pool) => pool.install(job),
                None => job(),
            };
        }
        positions
            .chunks_mut(dim)
            .zip(velocities.chunks_mut(dim))
            .enumerate()
            .map(|(p, (x, v))| f(p, x, v))
            .collect()
    }

    /// Map `f` over `0..n` and collect in index order.
    pub(crate) fn map_indices<F, T>(&self, n: usize, f: F) -> Vec<T>
    where
        F: Fn(usize) -> T + Sync + Send,
        T: Send,
    {
        #[cfg(feature = "parallel")]
        if let Some(pool) = &self.pool {
            use rayon::prelude::*;
            let job = || (0..n).into_par_iter().map(&f).collect();
            return match pool {
                Some(pool) => pool.install(job),
                None => job(),
            };
        }
        (0..n).map(f).collect()
    }
}

fn checked_density<D: Density + ?Sized>(target: &D, x: &[f64], stream: &RandomStream) -> Result<f64> {
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

fn scored<D: Density + ?Sized>(target: &D, x: &[f64], w: RewardWeights, stream: &RandomStream) -> Result<f64> {
    reward(checked_density(target, x, stream)?, w)
}

/// In-place particle update. `probe` is scratch space of length `d`.
/// Returns `(accepted, history reward)`.
fn update_in_place<D: Density + ?Sized>(
    x: &mut [f64],
    v: &mut [f64],
    probe: &mut [f64],
    target: &D,
    hp: &Hyperparameters,
    stream: &mut RandomStream,
) -> Result<(bool, f64)> {
    let w = hp.weights();
    let delta = stream.normal_vector(x.len(), hp.perturb_std());
    for ((t, xi), di) in probe.iter_mut().zip(x.iter()).zip(&delta) {
        *t = xi + di;
    }
    let probe_reward = scored(target, probe, w, stream)?;
    let current_reward = scored(target, x, w, stream)?;

    let accepted = probe_reward > current_reward;
    if accepted {
        for (vi, di) in v.iter_mut().zip(&delta) {
            *vi += hp.eta() * di;
        }
    } else {
        for vi in v.iter_mut() {
            *vi *= hp.gamma();
        }
    }

    let epsilon = hp.epsilon();
    for (xi, vi) in x.iter_mut().zip(v.iter()) {
        let e = epsilon * stream.standard_normal();
        *xi = *xi + vi + e;
    }
    clip_in_place(x, hp.bound());

    let history_reward = if hp.cheap_history() {
        probe_reward
    } else {
        scored(target, x, w, stream)?
    };
    Ok((accepted, history_reward))
}

/// Update a single particle using the caller's stream.
///
/// Draws `d` probe variates, then `d` exploration variates.
pub fn step_particle<D: Density + ?Sized>(
    x: &[f64],
    v: &[f64],
    target: &D,
    hp: &Hyperparameters,
    stream: &mut RandomStream,
) -> Result<StepOutcome> {
    let d = hp.dim();
    for len in [x.len(), v.len(), target.dim()] {
        if len != d {
            return Err(SamplerError::DimensionMismatch { expected: d, actual: len });
        }
    }
    let mut new_position = x.to_vec();
    let mut new_velocity = v.to_vec();
    let mut probe = vec![0.0; d];
    let (accepted, reward_at_new_position) =
        update_in_place(&mut new_position, &mut new_velocity, &mut probe, target, hp, stream)?;
    Ok(StepOutcome {
        accepted,
        new_position,
        new_velocity,
        reward_at_new_position,
    })
}

/// Advance every particle by one iteration and return the mean reward at the new positions.
///
/// On error the system is left partially updated.
pub fn step_system<D: Density + ?Sized>(
    sys: &mut ParticleSystem,
    target: &D,
    hp: &Hyperparameters,
    exec: &Executor,
) -> Result<f64> {
    let d = sys.dim();
    if d != hp.dim() || target.dim() != d {
        return Err(SamplerError::DimensionMismatch {
            expected: hp.dim(),
            actual: if d != hp.dim() { d } else { target.dim() },
        });
    }
    let m = sys.num_particles();
    let iteration = sys.iteration() + 1;
    let seed = hp.seed();
    let (positions, velocities) = sys.buffers_mut();
    let rewards = exec.map_rows(positions, velocities, d, |p, x, v| {
        let mut stream = RandomStream::for_step(seed, p, iteration);
        let mut probe = vec![0.0; d];
        update_in_place(x, v, &mut probe, target, hp, &mut stream).map(|(_, r)| r)
    });
    let mut total = 0.0;
    for r in rewards {
        total += r?;
    }
    sys.advance();
    Ok(total / m as f64)
}

/// Run the full sampler: initialize, iterate `T` times, collect the reward history.
pub fn run<D: Density + ?Sized>(hp: &Hyperparameters, target: &D) -> Result<RunResult> {
    run_with(hp, target, &Executor::default(), |_, _| {})
}

/// [`run`] with an explicit executor and a per-iteration observer `(iteration, mean_reward)`.
pub fn run_with<D, F>(hp: &Hyperparameters, target: &D, exec: &Executor, mut observe: F) -> Result<RunResult>
where
    D: Density + ?Sized,
    F: FnMut(u64, f64),
{
    if target.dim() != hp.dim() {
        return Err(SamplerError::DimensionMismatch {
            expected: hp.dim(),
            actual: target.dim(),
        });
    }
    let mut system = init_particles(hp);
    let mut history = RewardHistory::default();
    let mut trajectory = hp.record_trajectory().then(Vec::new);
    for _ in 0..hp.num_iterations() {
        let mean = step_system(&mut system, target, hp, exec)?;
        history.push(mean);
        if let Some(snapshots) = trajectory.as_mut() {
            snapshots.push(system.positions().to_vec());
        }
        observe(system.iteration(), mean);
    }
    Ok(RunResult {
        final_system: system,
        history,
        trajectory,
        metrics_summary: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::HyperparameterInput;
    use crate::reward::RewardWeights;
    use crate::target::TargetDensity;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Constant(usize);
    impl Density for Constant {
        fn dim(&self) -> usize {
            self.0
        }
        fn eval(&self, _: &[f64]) -> f64 {
            0.5
        }
    }

    /// Slopes upward along the first axis; every positive probe is accepted.
    struct Ramp;
    impl Density for Ramp {
        fn dim(&self) -> usize {
            1
        }
        fn eval(&self, x: &[f64]) -> f64 {
            (x[0] + 10.0) / 20.0
        }
    }

    struct Counting<T>(T, AtomicUsize);
    impl<T: Density> Density for Counting<T> {
        fn dim(&self) -> usize {
            self.0.dim()
        }
        fn eval(&self, x: &[f64]) -> f64 {
            self.1.fetch_add(1, Ordering::Relaxed);
            self.0.eval(x)
        }
    }

    fn hp(input: HyperparameterInput) -> Hyperparameters {
        input.validate().unwrap()
    }

    /// Replays the stream to recover the probe the engine drew.
    fn probe_of(seed: u64, particle: usize, iteration: u64, d: usize, std: f64) -> Vec<f64> {
        RandomStream::for_step(seed, particle, iteration).normal_vector(d, std)
    }

    #[test]
    fn rejected_step_without_damping_or_noise_is_stationary() {
        let hp = hp(HyperparameterInput {
            gamma: Some(0.0),
            epsilon: Some(0.0),
            ..HyperparameterInput::new(1, 2, 1, 5.0)
        });
        let x = [0.3, -1.7];
        let mut stream = RandomStream::for_step(0, 0, 1);
        let out = step_particle(&x, &[0.4, 0.2], &Constant(2), &hp, &mut stream).unwrap();
        assert!(!out.accepted);
        assert_eq!(out.new_velocity, vec![0.0, 0.0]);
        assert_eq!(out.new_position, x.to_vec());
        // Two probe variates and two exploration variates were consumed.
        assert!(stream.draw_counter() >= 8);
    }

    #[test]
    fn accepted_step_arithmetic() {
        // Search for a stream whose probe is accepted on the ramp, then check
        // v_new = η δ and x_new = x + v_new with ε = 0.
        let hp = hp(HyperparameterInput {
            epsilon: Some(0.0),
            ..HyperparameterInput::new(1, 1, 1, 5.0)
        });
        let (iteration, delta) = (1..)
            .map(|t| (t, probe_of(0, 0, t, 1, 0.1)))
            .find(|(_, d)| d[0] > 0.0)
            .unwrap();
        let mut stream = RandomStream::for_step(0, 0, iteration);
        let out = step_particle(&[0.0], &[0.0], &Ramp, &hp, &mut stream).unwrap();
        assert!(out.accepted);
        assert_eq!(out.new_velocity, vec![0.1 * delta[0]]);
        assert_eq!(out.new_position, vec![0.1 * delta[0]]);
    }

    #[test]
    fn velocity_update_worked_example() {
        // v=(0,0), η=0.1, δ=(0.2,−0.1) accepted, ε=0, x=(0,0) → v=(0.02,−0.01), x=v.
        let (eta, delta) = (0.1, [0.2, -0.1]);
        let v: Vec<f64> = delta.iter().map(|d| 0.0 + eta * d).collect();
        let x: Vec<f64> = v.iter().map(|vi| 0.0 + vi + 0.0).collect();
        assert!((v[0] - 0.02).abs() < 1e-15 && (v[1] + 0.01).abs() < 1e-15);
        assert_eq!(x, v);
    }

    #[test]
    fn rejected_step_damps_then_clips() {
        // v=0.5, γ=0.9, rejected, ε=0, x=1.9, L=2 → v=0.45, x=clip(2.35)=2.
        let hp = hp(HyperparameterInput {
            epsilon: Some(0.0),
            ..HyperparameterInput::new(1, 1, 1, 2.0)
        });
        let mut stream = RandomStream::for_step(3, 0, 1);
        let out = step_particle(&[1.9], &[0.5], &Constant(1), &hp, &mut stream).unwrap();
        assert!(!out.accepted);
        assert!((out.new_velocity[0] - 0.45).abs() < 1e-15);
        assert_eq!(out.new_position, vec![2.0]);
        // Velocity is left untouched by clipping.
        assert_eq!(out.new_velocity[0], 0.9 * 0.5);
    }

    #[test]
    fn greedy_accept_moves_exactly_to_probe() {
        let hp = hp(HyperparameterInput {
            alpha: Some(1.0),
            gamma: Some(0.0),
            epsilon: Some(0.0),
            eta: Some(1.0),
            ..HyperparameterInput::new(1, 2, 1, 10.0)
        });
        let target = TargetDensity::standard_gaussian(2);
        let x = [1.2, -0.8];
        let mut checked = 0;
        for t in 1..200 {
            let delta = probe_of(11, 0, t, 2, hp.perturb_std());
            let probe: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
            let mut stream = RandomStream::for_step(11, 0, t);
            let out = step_particle(&x, &[0.0, 0.0], &target, &hp, &mut stream).unwrap();
            if out.accepted {
                assert_eq!(out.new_position, probe);
                assert!(target.eval(&out.new_position) > target.eval(&x));
                checked += 1;
            } else {
                assert_eq!(out.new_position, x.to_vec());
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn non_finite_density_names_particle_and_iteration() {
        struct NanAfter;
        impl Density for NanAfter {
            fn dim(&self) -> usize {
                1
            }
            fn eval(&self, x: &[f64]) -> f64 {
                if x[0] > 0.0 { f64::NAN } else { 0.5 }
            }
        }
        let hp = hp(HyperparameterInput {
            seed: Some(1),
            ..HyperparameterInput::new(8, 1, 50, 3.0)
        });
        match run_with(&hp, &NanAfter, &Executor::sequential(), |_, _| {}) {
            Err(SamplerError::InvalidDensity { particle, iteration, value }) => {
                assert!(value.is_nan());
                assert!(particle < 8);
                assert_eq!(iteration, 1);
            }
            other => panic!("expected abort, got {other:?}"),
        }
    }

    #[test]
    fn single_particle_mean_is_its_reward() {
        let hp = hp(HyperparameterInput {
            seed: Some(4),
            ..HyperparameterInput::new(1, 2, 1, 5.0)
        });
        let target = TargetDensity::standard_gaussian(2);
        let mut sys = init_particles(&hp);
        let (x, v) = (sys.position(0).to_vec(), sys.velocity(0).to_vec());
        let mean = step_system(&mut sys, &target, &hp, &Executor::sequential()).unwrap();
        let out = step_particle(&x, &v, &target, &hp, &mut RandomStream::for_step(4, 0, 1)).unwrap();
        assert_eq!(mean, out.reward_at_new_position);
        assert_eq!(sys.position(0), &out.new_position[..]);
        assert_eq!(sys.iteration(), 1);
    }

    #[test]
    fn particles_at_peak_have_peak_reward() {
        let hp = hp(HyperparameterInput {
            epsilon: Some(0.0),
            perturb_std: Some(1e-4),
            ..HyperparameterInput::new(16, 1, 1, 5.0)
        });
        let sys = ParticleSystem::from_parts(1, vec![0.0; 16], vec![0.0; 16], 0);
        let mut sys2 = sys.clone();
        let mean = step_system(&mut sys2, &TargetDensity::standard_gaussian(1), &hp, &Executor::sequential()).unwrap();
        let peak = reward(1.0, RewardWeights::from_alpha(0.6).unwrap()).unwrap();
        assert!((mean - peak).abs() < 1e-6, "{mean}");
    }

    #[test]
    fn reverse_order_processing_matches() {
        let hp = hp(HyperparameterInput {
            seed: Some(21),
            ..HyperparameterInput::new(12, 2, 1, 4.0)
        });
        let target = TargetDensity::Banana { curvature: 0.3, scale: 2.0 };
        let start = init_particles(&hp);
        let mut forward = start.clone();
        let mean = step_system(&mut forward, &target, &hp, &Executor::sequential()).unwrap();

        let mut rewards = vec![0.0; 12];
        let mut positions = vec![Vec::new(); 12];
        for p in (0..12).rev() {
            let mut s = RandomStream::for_step(21, p, 1);
            let out = step_particle(start.position(p), start.velocity(p), &target, &hp, &mut s).unwrap();
            rewards[p] = out.reward_at_new_position;
            positions[p] = out.new_position;
        }
        assert_eq!(forward.to_rows(), positions);
        assert_eq!(mean, rewards.iter().sum::<f64>() / 12.0);
    }

    #[test]
    fn density_evaluations_per_iteration() {
        for (cheap, per_particle) in [(false, 3), (true, 2)] {
            let hp = hp(HyperparameterInput {
                cheap_history: Some(cheap),
                ..HyperparameterInput::new(10, 1, 4, 3.0)
            });
            let target = Counting(TargetDensity::standard_gaussian(1), AtomicUsize::new(0));
            run_with(&hp, &target, &Executor::sequential(), |_, _| {}).unwrap();
            assert_eq!(target.1.load(Ordering::Relaxed), per_particle * 10 * 4);
        }
    }

    #[test]
    fn zero_iterations_returns_initial_state() {
        let hp = hp(HyperparameterInput::new(5, 2, 0, 1.0));
        let result = run(&hp, &TargetDensity::standard_gaussian(2)).unwrap();
        assert!(result.history.is_empty());
        assert_eq!(result.final_system, init_particles(&hp));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let hp = hp(HyperparameterInput::new(5, 3, 1, 1.0));
        assert!(matches!(
            run(&hp, &TargetDensity::standard_gaussian(2)),
            Err(SamplerError::DimensionMismatch { expected: 3, actual: 2 })
        ));
    }

    #[test]
    fn trajectory_recorded_on_request() {
        let hp = hp(HyperparameterInput {
            record_trajectory: Some(true),
            ..HyperparameterInput::new(3, 2, 7, 2.0)
        });
        let result = run(&hp, &TargetDensity::Ring { radius: 1.0, width: 0.2 }).unwrap();
        let traj = result.trajectory.unwrap();
        assert_eq!(traj.len(), 7);
        assert!(traj.iter().all(|s| s.len() == 6));
        assert_eq!(traj.last().unwrap(), result.final_system.positions());
    }

    #[test]
    fn bounds_hold_every_iteration() {
        let hp = hp(HyperparameterInput {
            epsilon: Some(0.5),
            record_trajectory: Some(true),
            ..HyperparameterInput::new(50, 2, 100, 1.5)
        });
        let result = run(&hp, &TargetDensity::Ring { radius: 3.0, width: 0.3 }).unwrap();
        for snapshot in result.trajectory.unwrap() {
            assert!(snapshot.iter().all(|x| (-1.5..=1.5).contains(x)));
        }
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn worker_count_does_not_change_results() {
        let hp = hp(HyperparameterInput {
            seed: Some(77),
            record_trajectory: Some(true),
            ..HyperparameterInput::new(64, 2, 40, 3.0)
        });
        let target = TargetDensity::Banana { curvature: 0.5, scale: 1.5 };
        let seq = run_with(&hp, &target, &Executor::sequential(), |_, _| {}).unwrap();
        for workers in [1, 3, 8] {
            let par = run_with(&hp, &target, &Executor::parallel(workers).unwrap(), |_, _| {}).unwrap();
            assert_eq!(par, seq);
        }
    }
}
