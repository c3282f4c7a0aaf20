//! Data-parallel execution of independent grid points.
//!
//! With the `parallel` feature (on by default) bulk operations fan out over
//! a rayon thread pool; without it they run sequentially with identical
//! results. [`parallel_map`] exposes the same switch to callers and
//! benchmarks.

use crate::error::{Error, Result};

/// Execution strategy for bulk operations over independent items.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parallelism {
    Sequential,
    Parallel,
}

impl Parallelism {
    /// The best strategy this build supports: `Parallel` when compiled with
    /// the `parallel` feature, `Sequential` otherwise.
    pub fn available() -> Self {
        if cfg!(feature = "parallel") {
            Parallelism::Parallel
        } else {
            Parallelism::Sequential
        }
    }
}

/// Map a function over a slice, sequentially or via rayon. With the
/// `parallel` feature disabled, `Parallelism::Parallel` silently degrades to
/// sequential execution.
pub fn parallel_map<T, U, F>(mode: Parallelism, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == Parallelism::Parallel {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}

/// Map a function over indices `0..n` using the best available strategy.
pub(crate) fn map_indexed<U, F>(n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync,
{
    let indices: Vec<usize> = (0..n).collect();
    parallel_map(Parallelism::available(), &indices, |&i| f(i))
}

/// Configure the global worker-thread count for parallel execution. Calling
/// this more than once, or after parallel work has already run, errors
/// because the pool is global and fixed after first use. Without the
/// `parallel` feature this is a no-op.
pub fn configure_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        return Err(Error::invalid("thread count must be at least 1"));
    }
    #[cfg(feature = "parallel")]
    {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::invalid(format!("could not configure thread pool: {e}")))?;
    }
    Ok(())
}
