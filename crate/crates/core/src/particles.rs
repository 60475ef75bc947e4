//! Particle state, initialization and bound clipping.

use crate::params::Hyperparameters;
use crate::rng::{RandomStream, StreamDomain};

/// Positions and velocities of `M` particles in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    dim: usize,
    positions: Vec<f64>,
    velocities: Vec<f64>,
    iteration: u64,
}

impl ParticleSystem {
    /// Build a system from row-major positions and velocities.
    ///
    /// Panics if the buffers disagree in length or are not a multiple of `dim`.
    pub fn from_parts(dim: usize, positions: Vec<f64>, velocities: Vec<f64>, iteration: u64) -> Self {
        assert!(dim > 0, "dim must be positive");
        assert_eq!(positions.len(), velocities.len(), "shape mismatch");
        assert_eq!(positions.len() % dim, 0, "buffer not a multiple of dim");
        Self {
            dim,
            positions,
            velocities,
            iteration,
        }
    }

    pub fn num_particles(&self) -> usize {
        self.positions.len() / self.dim
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn position(&self, particle: usize) -> &[f64] {
        &self.positions[particle * self.dim..(particle + 1) * self.dim]
    }

    pub fn velocity(&self, particle: usize) -> &[f64] {
        &self.velocities[particle * self.dim..(particle + 1) * self.dim]
    }

    /// Row-major `M×d` positions.
    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.positions.chunks_exact(self.dim)
    }

    /// Positions as one `Vec` per particle.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    /// True when every coordinate lies in `[-bound, bound]`.
    pub fn within_bounds(&self, bound: f64) -> bool {
        self.positions.iter().all(|x| (-bound..=bound).contains(x))
    }

    pub(crate) fn buffers_mut(&mut self) -> (&mut [f64], &mut [f64]) {
        (&mut self.positions, &mut self.velocities)
    }

    pub(crate) fn advance(&mut self) {
        self.iteration += 1;
    }
}

/// Draw positions i.i.d. uniform on `[-L, L]^d` with zero velocities.
///
/// Particle `p` uses the stream keyed `(seed, Init, p, 0)`.
pub fn init_particles(hp: &Hyperparameters) -> ParticleSystem {
    let (m, d, bound) = (hp.num_particles(), hp.dim(), hp.bound());
    let mut positions = Vec::with_capacity(m * d);
    for p in 0..m {
        let mut stream = RandomStream::new(hp.seed(), StreamDomain::Init, p, 0);
        positions.extend((0..d).map(|_| stream.uniform(-bound, bound)));
    }
    ParticleSystem::from_parts(d, positions, vec![0.0; m * d], 0)
}

/// Componentwise clamp into `[-bound, bound]`.
pub fn clip_position(x: &[f64], bound: f64) -> Vec<f64> {
    let mut out = x.to_vec();
    clip_in_place(&mut out, bound);
    out
}

pub(crate) fn clip_in_place(x: &mut [f64], bound: f64) {
    for xi in x {
        *xi = xi.clamp(-bound, bound);
    }
}
