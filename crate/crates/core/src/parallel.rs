//! Execution modes for chunk reductions.
//!
//! `ParallelOrdered` computes per-chunk partials on the rayon pool but merges
//! them in chunk-index order, so its result is bit-identical to `Sequential`.
//! `ParallelUnordered` lets rayon pick the reduction tree; results may differ
//! from the ordered modes by float reassociation only.
//!
//! Without the `parallel` feature both parallel modes fall back to the
//! sequential path.

use crate::data::{Dataset, RowChunk};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    ParallelOrdered,
    ParallelUnordered,
}

impl Default for ExecMode {
    /// Deterministic and parallel when the `parallel` feature is compiled in.
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            ExecMode::ParallelOrdered
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps every chunk and reduces the partials. Returns `None` for a dataset
/// with no chunks.
pub fn map_reduce_chunks<T, M, R>(
    data: &dyn Dataset,
    mode: ExecMode,
    map: M,
    reduce: R,
) -> Option<T>
where
    T: Send,
    M: Fn(usize, &RowChunk) -> T + Sync,
    R: Fn(T, T) -> T + Sync,
{
    let n = data.n_chunks();
    if n == 0 {
        return None;
    }

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        match mode {
            ExecMode::Sequential => {}
            ExecMode::ParallelOrdered => {
                let partials: Vec<T> = (0..n)
                    .into_par_iter()
                    .map(|i| map(i, &data.chunk(i)))
                    .collect();
                return partials.into_iter().reduce(reduce);
            }
            ExecMode::ParallelUnordered => {
                return (0..n)
                    .into_par_iter()
                    .map(|i| map(i, &data.chunk(i)))
                    .reduce_with(reduce);
            }
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = mode;

    (0..n).map(|i| map(i, &data.chunk(i))).reduce(reduce)
}

/// Maps every chunk, returning the per-chunk values in chunk-index order.
/// Used for positional outputs (predictions, leverages).
pub fn map_chunks<T, M>(data: &dyn Dataset, mode: ExecMode, map: M) -> Vec<T>
where
    T: Send,
    M: Fn(usize, &RowChunk) -> T + Sync,
{
    let n = data.n_chunks();
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if mode != ExecMode::Sequential {
            return (0..n)
                .into_par_iter()
                .map(|i| map(i, &data.chunk(i)))
                .collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = mode;

    (0..n).map(|i| map(i, &data.chunk(i))).collect()
}

/// Runs independent jobs indexed 0..n, collecting results in index order.
/// Used for experiment replicates; each job derives its own seed so ordering
/// never affects content.
pub fn map_indexed<T, F>(n: usize, mode: ExecMode, job: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if mode != ExecMode::Sequential {
            return (0..n).into_par_iter().map(job).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = mode;

    (0..n).map(job).collect()
}
