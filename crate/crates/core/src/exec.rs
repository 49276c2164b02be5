//! Sequential / data-parallel execution of the hot loops.
//!
//! Every parallel path produces results in input order, so output is
//! identical for every thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    /// Uses the rayon global pool. Falls back to sequential without the
    /// `parallel` feature.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `f` applied to every item, results in input order.
    pub fn map<T, R, F>(self, items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items.par_iter().map(f).collect(),
            _ => items.iter().map(f).collect(),
        }
    }

    /// `f(i)` for `i in 0..n`, results in index order.
    pub fn map_range<R, F>(self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
            _ => (0..n).map(f).collect(),
        }
    }

    /// Fold over contiguous chunks and merge the partial results in chunk
    /// order. `merge` must be associative.
    pub fn fold_chunks<T, A, I, F, M>(
        self,
        items: &[T],
        chunk: usize,
        init: I,
        fold: F,
        merge: M,
    ) -> A
    where
        T: Sync,
        A: Send,
        I: Fn() -> A + Sync + Send,
        F: Fn(A, &T) -> A + Sync + Send,
        M: Fn(A, A) -> A + Sync + Send,
    {
        let chunk = chunk.max(1);
        let partials: Vec<A> = match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => items
                .par_chunks(chunk)
                .map(|c| c.iter().fold(init(), &fold))
                .collect(),
            _ => items
                .chunks(chunk)
                .map(|c| c.iter().fold(init(), &fold))
                .collect(),
        };
        partials.into_iter().fold(init(), merge)
    }
}

/// Caps the global worker pool. Zero keeps the default (one worker per core).
/// Only the first call has an effect.
pub fn set_threads(threads: usize) {
    #[cfg(feature = "parallel")]
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let xs: Vec<u64> = (0..1000).collect();
        let a = Execution::Sequential.map(&xs, |x| x * x);
        let b = Execution::Parallel.map(&xs, |x| x * x);
        assert_eq!(a, b);
        let sa = Execution::Sequential.fold_chunks(&xs, 7, || 0u64, |a, x| a + x, |a, b| a + b);
        let sb = Execution::Parallel.fold_chunks(&xs, 7, || 0u64, |a, x| a + x, |a, b| a + b);
        assert_eq!(sa, sb);
        assert_eq!(sa, 999 * 1000 / 2);
    }
}
