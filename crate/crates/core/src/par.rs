//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) work is spread over the rayon pool;
//! without it every helper runs the same closures in index order. Floating
//! point reductions always go through fixed-size chunks whose partial sums are
//! combined sequentially, so results do not depend on the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

/// Evaluates `f(0..n)` and collects the results in index order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
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

/// Maps each item of a slice, preserving order.
pub fn map_slice<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
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

/// Sum of `f(i)` for `i in 0..n` with a reduction order fixed by [`REDUCE_CHUNK`].
pub fn sum(n: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    sum_chunked(n, REDUCE_CHUNK, f)
}

/// Like [`sum`] with an explicit chunk length (useful when each term is expensive).
pub fn sum_chunked(n: usize, chunk: usize, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let partial = map_collect(n_chunks, |c| {
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        (lo..hi).map(&f).sum::<f64>()
    });
    partial.into_iter().sum()
}

/// Vector-valued variant of [`sum_chunked`]: component-wise sums of `f(i)`.
pub fn sum_vec_chunked(
    n: usize,
    width: usize,
    chunk: usize,
    f: impl Fn(usize, &mut [f64]) + Sync + Send,
) -> Vec<f64> {
    let chunk = chunk.max(1);
    let n_chunks = n.div_ceil(chunk);
    let partial = map_collect(n_chunks, |c| {
        let mut acc = vec![0.0; width];
        let lo = c * chunk;
        let hi = (lo + chunk).min(n);
        for i in lo..hi {
            f(i, &mut acc);
        }
        acc
    });
    let mut total = vec![0.0; width];
    for p in partial {
        for (t, v) in total.iter_mut().zip(p) {
            *t += v;
        }
    }
    total
}

/// Runs `f(row_index, row)` over consecutive rows of length `row_len`.
pub fn for_each_row_mut<T, F>(data: &mut [T], row_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(row_len)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
    }
}
