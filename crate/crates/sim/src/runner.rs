//! Replica-parallel driver. Each replica owns a ChaCha stream keyed by
//! (master seed, experiment label, replica index), and results come back
//! indexed by replica, so worker count and scheduling cannot change any
//! output.

use contact_core::rng::{replica_rng, SimRng};
use rayon::prelude::*;

/// Builds a scoped thread pool; `threads == 0` means all cores.
pub fn pool(threads: usize) -> rayon::ThreadPool {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    builder.build().expect("thread pool")
}

/// Maps `f` over replica indices in parallel; the result vector is in
/// replica order regardless of scheduling.
pub fn run_replicas<T: Send, F: Sync + Fn(u64, &mut SimRng) -> T>(
    pool: &rayon::ThreadPool,
    master_seed: u64,
    label: &str,
    replicas: u64,
    f: F,
) -> Vec<T> {
    pool.install(|| {
        (0..replicas)
            .into_par_iter()
            .map(|rep| {
                let mut rng = replica_rng(master_seed, label, rep);
                f(rep, &mut rng)
            })
            .collect()
    })
}
