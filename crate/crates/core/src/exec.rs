//! Data-parallel helpers.
//!
//! Every parallel loop in the crate goes through these functions. Each output
//! slot is computed independently and reductions happen afterwards in index
//! order, so results do not depend on the number of worker threads. Building
//! without the `parallel` feature swaps in plain sequential loops.

use crate::{FioError, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Evaluates `f` at `0..n` and returns the results in index order.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Fallible variant of [`map_range`]; the reported error is the one with the
/// lowest index, independent of scheduling.
pub fn try_map_range<T, E, F>(n: usize, f: F) -> std::result::Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> std::result::Result<T, E> + Sync + Send,
{
    map_range(n, f).into_iter().collect()
}

/// Maps over a slice in parallel, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Runs `work` on a dedicated pool with `threads` workers (`None` uses the
/// global pool). Without the `parallel` feature the closure runs inline.
pub fn with_threads<R, F>(threads: Option<usize>, work: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match threads {
        None => Ok(work()),
        Some(0) => Err(FioError::invalid("thread count must be positive")),
        #[cfg(feature = "parallel")]
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| FioError::invalid(format!("thread pool: {e}")))?;
            Ok(pool.install(work))
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(work()),
    }
}

/// Number of workers the global pool would use.
pub fn available_workers() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}
