//! Order-independent parallel reductions.
//!
//! Work is split into fixed-size chunks, each chunk is summed sequentially
//! and the partial sums are combined in chunk order, so results do not
//! depend on the thread count.

use rayon::prelude::*;

const CHUNK: usize = 2048;

/// Sum of `f(i)` over `items`, deterministic for any thread pool.
pub fn det_sum<T, F>(items: &[T], f: F) -> f64
where
    T: Sync,
    F: Fn(&T) -> f64 + Sync,
{
    let partials: Vec<f64> = items
        .par_chunks(CHUNK)
        .map(|c| c.iter().map(&f).sum::<f64>())
        .collect();
    partials.iter().sum()
}

/// Deterministic sum of `f(i)` for `i in 0..n`.
pub fn det_sum_range<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let nchunks = n.div_ceil(CHUNK);
    let partials: Vec<f64> = (0..nchunks)
        .into_par_iter()
        .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f).sum::<f64>())
        .collect();
    partials.iter().sum()
}
