//! Counter-based random number generation.
//!
//! Every variate is a pure function of (stream, seed, index, coord, sub)
//! pushed through a splitmix64-style finalizer chain. There is no mutable
//! generator state, so sample j of a run is identical no matter how many
//! samples are drawn, in what order, or on how many threads. In particular a
//! run with r' > r features reproduces the first r features of the shorter
//! run bit-for-bit.

/// Stream id for feature parameter draws.
pub const STREAM_FEATURES: u64 = 1;

/// Stream id for synthetic dataset draws.
pub const STREAM_DATASET: u64 = 2;

/// Stream id for internal numerical searches (constant maximization).
pub const STREAM_SEARCH: u64 = 3;

fn mix64(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58476d1ce4e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    z
}

fn key(stream: u64, seed: u64, index: u64, coord: u64, sub: u64) -> u64 {
    let mut h = mix64(stream.wrapping_mul(0x9e3779b97f4a7c15) ^ seed);
    h = mix64(h ^ index.wrapping_mul(0xbf58476d1ce4e5b9));
    h = mix64(h ^ coord.wrapping_mul(0x94d049bb133111eb));
    h = mix64(h ^ sub.wrapping_mul(0x2545f4914f6cdd1d));
    h
}

/// Stateless generator handle: a (stream, seed) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    stream: u64,
    seed: u64,
}

impl CounterRng {
    pub fn new(stream: u64, seed: u64) -> Self {
        Self { stream, seed }
    }

    /// Uniform variate in the open interval (0, 1).
    pub fn uniform(&self, index: u64, coord: u64, sub: u64) -> f64 {
        let h = key(self.stream, self.seed, index, coord, sub);
        ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal variate via Box-Muller on two sub-draws.
    pub fn normal(&self, index: u64, coord: u64) -> f64 {
        let u1 = self.uniform(index, coord, 0);
        let u2 = self.uniform(index, coord, 1);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}
