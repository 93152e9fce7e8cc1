//! Execution policy shared by the scan-style entry points.
//!
//! With the `parallel` feature (on by default) work is spread over the rayon
//! pool; without it, or with [`Exec::Sequential`], the same closures run on the
//! calling thread. Reductions must be associative with canonical tie-breaking
//! so both paths produce identical results.

use std::ops::Range;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Exec {
    #[default]
    Parallel,
    Sequential,
}

impl Exec {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Folds every index of `range` into an accumulator and merges the partial
/// accumulators with `reduce`.
pub fn fold_reduce<T, ID, F, R>(exec: Exec, range: Range<usize>, identity: ID, fold: F, reduce: R) -> T
where
    T: Send,
    ID: Fn() -> T + Sync + Send,
    F: Fn(T, usize) -> T + Sync + Send,
    R: Fn(T, T) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return range
            .into_par_iter()
            .fold(&identity, &fold)
            .reduce(&identity, &reduce);
    }
    let _ = (&reduce, exec);
    range.fold(identity(), fold)
}

/// Maps every index of `range`, preserving order.
pub fn map_collect<T, F>(exec: Exec, range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Runs `f` inside a pool of `threads` workers (or the global pool for `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    #[cfg(feature = "parallel")]
    if let Some(k) = threads {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = threads;
    f()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_policies_agree() {
        for exec in [Exec::Parallel, Exec::Sequential] {
            let s = fold_reduce(exec, 0..1000, || 0u64, |a, i| a + i as u64, |a, b| a + b);
            assert_eq!(s, 499_500);
            let v = map_collect(exec, 0..5, |i| i * i);
            assert_eq!(v, vec![0, 1, 4, 9, 16]);
        }
    }
}
