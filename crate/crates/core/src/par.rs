//! Deterministic data-parallel accumulation.
//!
//! Work is cut into fixed-size chunks independent of the worker count. Each
//! chunk accumulates sequentially in index order, and chunk results are
//! combined by a pairwise tree in chunk order, so the floating-point result is
//! the same for one thread, many threads, or the `no_std` sequential path.

use alloc::vec;
use alloc::vec::Vec;

pub(crate) const CHUNK: usize = 1024;

/// Sums per-item contributions into `width` accumulators.
///
/// `item(i, acc)` adds item `i`'s contribution into `acc` (length `width`).
pub(crate) fn accumulate<F>(len: usize, width: usize, item: F) -> Vec<f64>
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    let chunks = len.div_ceil(CHUNK);
    let run = |c: usize| {
        let mut acc = vec![0.0; width];
        let end = ((c + 1) * CHUNK).min(len);
        for i in c * CHUNK..end {
            item(i, &mut acc);
        }
        acc
    };
    #[cfg(feature = "std")]
    let partials: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..chunks).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "std"))]
    let partials: Vec<Vec<f64>> = (0..chunks).map(run).collect();
    tree_sum(partials, width)
}

/// Maps every index, preserving order.
pub(crate) fn map<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        (0..len).map(f).collect()
    }
}

fn tree_sum(mut level: Vec<Vec<f64>>, width: usize) -> Vec<f64> {
    if level.is_empty() {
        return vec![0.0; width];
    }
    while level.len() > 1 {
        let mut next = Vec::with_capacity(level.len().div_ceil(2));
        let mut it = level.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
            }
            next.push(a);
        }
        level = next;
    }
    level.pop().unwrap_or_default()
}

/// Sum of a slice in the same chunked tree order as [`accumulate`], so a
/// total and a one-bucket accumulation of the same items agree bit for bit.
pub(crate) fn pairwise_sum(values: &[f64]) -> f64 {
    accumulate(values.len(), 1, |i, acc| acc[0] += values[i])[0]
}
