//! Per-index fan-out.

use crate::context::Execution;

/// Applies `f` to every index, returning results in input order.
///
/// With the `parallel` feature and [`Execution::Parallel`] the work is spread
/// over the rayon pool; otherwise it runs on the calling thread.
pub fn map_indices<T, F>(exec: Execution, indices: &[u64], f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Execution::Parallel && indices.len() > 1 {
            use rayon::prelude::*;
            return indices.par_iter().map(|&n| f(n)).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = exec;
    indices.iter().map(|&n| f(n)).collect()
}
