//! Seeded random inputs for property sweeps and stress runs.

use alloc::vec::Vec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hilbert::Vector;

/// Default seed of every randomized run.
pub const DEFAULT_SEED: u64 = 0x5EED;

/// Deterministic source of random vectors.
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn new(seed: u64) -> Self {
        Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Coordinates uniform in `[-scale, scale]`.
    pub fn vector(&mut self, dim: usize, scale: f64) -> Vector {
        Vector::from((0..dim).map(|_| self.rng.gen_range(-scale..=scale)).collect::<Vec<_>>())
    }

    pub fn pairs(&mut self, count: usize, dim: usize, scale: f64) -> Vec<(Vector, Vector)> {
        (0..count).map(|_| (self.vector(dim, scale), self.vector(dim, scale))).collect()
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.gen_range(lo..hi)
    }

    pub fn index(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }
}
