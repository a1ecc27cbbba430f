//! Reproducible random-number streams.
//!
//! Every replica of every experiment draws from its own ChaCha8 stream,
//! keyed by `(master seed, experiment id, replica index)`. Streams are
//! therefore independent of worker scheduling: replica `i` sees the same
//! randomness whether it runs first, last, or on another thread.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate. ChaCha8 is cross-platform stable
/// and fast enough that it never dominates the event loop.
pub type SimRng = ChaCha8Rng;

/// FNV-1a on the bytes of a label; used to fold experiment names into
/// the seed material.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// SplitMix64 step; good avalanche, used only for seed derivation.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Derive the seed for one replica from the master seed, an experiment
/// label and the replica index.
pub fn replica_seed(master_seed: u64, experiment: &str, replica: u64) -> u64 {
    let mut s = master_seed ^ fnv1a(experiment.as_bytes());
    let a = splitmix64(&mut s);
    s ^= replica;
    a ^ splitmix64(&mut s)
}

/// The stream for one replica of one experiment.
pub fn replica_rng(master_seed: u64, experiment: &str, replica: u64) -> SimRng {
    SimRng::seed_from_u64(replica_seed(master_seed, experiment, replica))
}

/// A seeded stream for single-shot use (graph generation, one-off runs).
pub fn seeded(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Exponential variate with the given rate. Uses the inversion method on
/// a uniform in (0, 1]; `rate` must be positive and finite.
pub fn exp_sample<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    // 1 - U lies in (0, 1], so the log is finite.
    let u = 1.0 - rng.gen::<f64>();
    -libm::log(u) / rate
}
