//! Work pool for independent experiment instances.

use rayon::prelude::*;

pub const THREADS_VAR: &str = "SPARSE_POINCARE_THREADS";

/// Worker count from `SPARSE_POINCARE_THREADS`, if set to a positive integer.
pub fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_VAR).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Evaluates `f(0..count)` on the pool and returns the results in index
/// order, whatever the scheduling.
pub fn map<T, F>(count: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    let run = || (0..count).into_par_iter().map(&f).collect();
    match configured_threads() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        },
        None => run(),
    }
}

/// As [`map`] for fallible work; the first error by index wins.
pub fn try_map<T, E, F>(count: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map(count, f).into_iter().collect()
}
