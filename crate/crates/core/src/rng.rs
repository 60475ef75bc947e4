//! Counter-based random streams.
//!
//! Every variate consumed anywhere in a run is addressed by
//! `(root_seed, domain, index, iteration, draw_counter)`. The stream for a
//! given `(index, iteration)` pair is a ChaCha8 keystream positioned at a
//! fixed offset, so it can be materialized on any thread in any order and
//! still yield the same numbers. This is what makes parallel runs
//! bit-identical to sequential ones.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Words reserved per `(index, iteration)` slot in the keystream.
const ITERATION_SHIFT: u32 = 32;

/// Separates the keystreams used by different phases of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamDomain {
    /// Particle initialization.
    Init,
    /// Per-iteration particle updates.
    Step,
    /// Metropolis-Hastings chains.
    Chain,
}

impl StreamDomain {
    fn salt(self) -> u64 {
        match self {
            StreamDomain::Init => 0x6a09_e667_f3bc_c908,
            StreamDomain::Step => 0xbb67_ae85_84ca_a73b,
            StreamDomain::Chain => 0x3c6e_f372_fe94_f82b,
        }
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn derive_key(root_seed: u64, domain: StreamDomain) -> [u8; 32] {
    let mut state = root_seed ^ domain.salt();
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    key
}

/// A deterministic random stream keyed by `(root_seed, domain, index, iteration)`.
///
/// `index` is the particle (or chain) index. The draw counter is the number of
/// 32-bit keystream words consumed since the stream was opened.
#[derive(Debug, Clone)]
pub struct RandomStream {
    root_seed: u64,
    domain: StreamDomain,
    index: usize,
    iteration: u64,
    origin: u128,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(root_seed: u64, domain: StreamDomain, index: usize, iteration: u64) -> Self {
        debug_assert!(iteration < (1 << 36), "iteration exceeds keystream capacity");
        let mut rng = ChaCha8Rng::from_seed(derive_key(root_seed, domain));
        rng.set_stream(index as u64);
        let origin = u128::from(iteration) << ITERATION_SHIFT;
        rng.set_word_pos(origin);
        Self {
            root_seed,
            domain,
            index,
            iteration,
            origin,
            rng,
        }
    }

    /// Stream for one particle's update at one iteration.
    pub fn for_step(root_seed: u64, particle: usize, iteration: u64) -> Self {
        Self::new(root_seed, StreamDomain::Step, particle, iteration)
    }

    pub fn root_seed(&self) -> u64 {
        self.root_seed
    }

    pub fn domain(&self) -> StreamDomain {
        self.domain
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn iteration(&self) -> u64 {
        self.iteration
    }

    pub fn draw_counter(&self) -> u128 {
        self.rng.get_word_pos() - self.origin
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform on `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    /// Uniform on the closed interval `[low, high]`.
    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        (low + (high - low) * self.unit()).clamp(low, high)
    }

    /// `dim` i.i.d. draws from `Normal(0, std²)`.
    pub fn normal_vector(&mut self, dim: usize, std: f64) -> Vec<f64> {
        (0..dim).map(|_| std * self.standard_normal()).collect()
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
