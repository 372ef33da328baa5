//! Data-parallel helpers with a sequential fallback.
//!
//! Every reduction here folds fixed-size chunks in index order, so the
//! result is bit-identical whether the chunks were produced by one thread
//! or many. Builds without the `parallel` feature run the same chunked
//! code on the calling thread.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Rows per chunk in chunked reductions. Fixed so that summation order
/// never depends on the thread count.
pub const CHUNK_ROWS: usize = 512;

/// How a data-parallel loop is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the ambient rayon pool when the `parallel` feature is enabled,
    /// otherwise identical to `Sequential`.
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Order-preserving map over a slice.
pub fn map<T, U, F>(exec: Execution, items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Order-preserving map over `0..n`.
pub fn map_range<U, F>(exec: Execution, n: usize, f: F) -> Vec<U>
where
    U: Send,
    F: Fn(usize) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Sum of `f(i)` for `i in 0..n` with a fixed chunked summation order.
pub fn sum_range<F>(exec: Execution, n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let partials = map_range(exec, n.div_ceil(CHUNK_ROWS), |c| {
        let start = c * CHUNK_ROWS;
        let end = (start + CHUNK_ROWS).min(n);
        (start..end).map(&f).sum::<f64>()
    });
    partials.into_iter().sum()
}

/// Element-wise sum of `width`-long vectors produced per row.
///
/// `accumulate(i, acc)` adds row `i`'s contribution into `acc`. Chunks are
/// accumulated independently and then folded in chunk order.
pub fn sum_vectors<F>(exec: Execution, n: usize, width: usize, accumulate: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let partials = map_range(exec, n.div_ceil(CHUNK_ROWS), |c| {
        let start = c * CHUNK_ROWS;
        let end = (start + CHUNK_ROWS).min(n);
        let mut acc = vec![0.0; width];
        for i in start..end {
            accumulate(i, &mut acc);
        }
        acc
    });
    let mut total = vec![0.0; width];
    for part in partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    total
}
