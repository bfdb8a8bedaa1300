//! Seeded random streams.
//!
//! Every stochastic operation draws from an [`RngStream`] owned by the caller.
//! ChaCha8 is used because its output is fixed across platforms and crate
//! versions, which the reproducibility guarantees depend on.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of uniform draws on `[0, 1)`.
///
/// The update rules are written against this trait so that tests can
/// script the exact values of `r1`, `r2`, `u`.
pub trait Uniform01 {
    fn next_unit(&mut self) -> f64;

    /// Uniform index in `0..n`.
    fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_unit() * n as f64) as usize).min(n - 1)
    }
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Stream `stream` of generator `seed`; distinct streams are independent.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent child stream, deterministic in the parent's state.
    pub fn fork(&mut self) -> RngStream {
        RngStream::new(self.inner.random())
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        if low == high {
            return low;
        }
        low + (high - low) * self.inner.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.inner.random::<f64>() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(rand_distr::StandardNormal)
    }
}

impl Uniform01 for RngStream {
    fn next_unit(&mut self) -> f64 {
        self.inner.random()
    }

    fn next_index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }
}

/// Replays a fixed list of draws, cycling when exhausted.
#[derive(Debug, Clone)]
pub struct ScriptedDraws {
    values: Vec<f64>,
    pos: usize,
}

impl ScriptedDraws {
    pub fn new(values: Vec<f64>) -> Self {
        assert!(!values.is_empty(), "scripted draws need at least one value");
        Self { values, pos: 0 }
    }
}

impl Uniform01 for ScriptedDraws {
    fn next_unit(&mut self) -> f64 {
        let v = self.values[self.pos % self.values.len()];
        self.pos += 1;
        v
    }
}
