//! Execution strategy for the data-parallel scans (valuation sweeps,
//! leaf-subset enumeration, per-requirement monitoring).
//!
//! With the `parallel` feature the scans run on the rayon pool; without it
//! every strategy runs sequentially. Both paths produce identical,
//! order-preserving results.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Sequential,
    Parallel,
}

impl Default for Strategy {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Strategy::Parallel
        } else {
            Strategy::Sequential
        }
    }
}

/// Keeps the indices in `0..n` for which `keep` holds, in ascending order.
pub(crate) fn filter_range<F>(strategy: Strategy, n: u64, keep: F) -> Vec<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    match strategy {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().filter(|&i| keep(i)).collect()
        }
        _ => (0..n).filter(|&i| keep(i)).collect(),
    }
}

/// Lowest index in `0..n` satisfying `pred`.
pub(crate) fn find_first_in_range<F>(strategy: Strategy, n: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    match strategy {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().find_first(|&i| pred(i))
        }
        _ => (0..n).find(|&i| pred(i)),
    }
}

/// Order-preserving map over a slice.
pub(crate) fn map_slice<T, R, F>(strategy: Strategy, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match strategy {
        #[cfg(feature = "parallel")]
        Strategy::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
