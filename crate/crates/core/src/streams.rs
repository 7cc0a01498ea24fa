//! Reproducible parallel random streams.
//!
//! Work is split into one contiguous chunk per worker. Chunk `i` draws from
//! ChaCha8 seeded with the run seed on stream `i`, so output depends on the
//! seed and the worker count only, never on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type StreamRng = ChaCha8Rng;

/// RNG for worker `index` of a run seeded with `seed`.
pub fn worker_rng(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Index ranges of the `workers` chunks of `0..total`.
pub fn chunk_bounds(total: usize, workers: usize) -> Vec<(usize, usize)> {
    let workers = workers.max(1);
    (0..workers)
        .map(|i| (total * i / workers, total * (i + 1) / workers))
        .collect()
}

/// Runs `job(rng, index)` for every index in `0..total`, in parallel over
/// `workers` streams, and returns the results in index order.
pub fn run_streams<T, F>(total: usize, workers: usize, seed: u64, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut StreamRng, usize) -> T + Sync,
{
    let bounds = chunk_bounds(total, workers);
    let run_chunk = |(i, &(lo, hi)): (usize, &(usize, usize))| {
        let mut rng = worker_rng(seed, i as u64);
        (lo..hi).map(|k| job(&mut rng, k)).collect::<Vec<T>>()
    };
    let chunks: Vec<Vec<T>> = if bounds.len() == 1 {
        bounds.iter().enumerate().map(run_chunk).collect()
    } else {
        bounds.par_iter().enumerate().map(run_chunk).collect()
    };
    chunks.into_iter().flatten().collect()
}
