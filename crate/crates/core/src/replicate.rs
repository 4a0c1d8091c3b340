//! Replicate fan-out.
//!
//! Replicate `r` draws all of its randomness from seeds derived from
//! `(master_seed, r)`, and results are collected in replicate order before
//! any aggregation, so the outcome does not depend on the worker count or
//! on scheduling. With the `parallel` feature the work runs on the current
//! rayon pool; callers pick the worker count by installing a pool.

use crate::rng;

/// Seed of replicate `r` under `master_seed`.
pub fn replicate_seed(master_seed: u64, r: u64) -> u64 {
    rng::derive(master_seed, &[r])
}

/// Evaluates `f(r)` for `r in 0..replicates`, returning results in order.
#[cfg(feature = "parallel")]
pub fn map<T, F>(replicates: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..replicates).into_par_iter().map(f).collect()
}

/// Evaluates `f(r)` for `r in 0..replicates`, returning results in order.
#[cfg(not(feature = "parallel"))]
pub fn map<T, F>(replicates: u64, f: F) -> Vec<T>
where
    F: Fn(u64) -> T,
{
    (0..replicates).map(f).collect()
}

/// As [`map`] for fallible replicates; the first error in replicate order wins.
pub fn try_map<T, E, F>(replicates: u64, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64) -> Result<T, E> + Sync + Send,
{
    map(replicates, f).into_iter().collect()
}
