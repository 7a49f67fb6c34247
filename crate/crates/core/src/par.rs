//! Data-parallel helpers. With the `parallel` feature these run on the rayon
//! pool; without it they fall back to plain sequential iterators. Callers only
//! pass order-independent reductions, so results are identical either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
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

/// Maps `f` over the half-open ranges covering `0..total` in pieces of
/// `chunk`, then folds the results with `merge`. `merge` must be associative
/// and commutative up to the value it produces.
pub fn chunked_reduce<R, F, M>(total: u64, chunk: u64, identity: R, f: F, merge: M) -> R
where
    R: Send + Clone + Sync,
    F: Fn(std::ops::Range<u64>) -> R + Sync + Send,
    M: Fn(R, R) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    let pieces = total.div_ceil(chunk);
    let range = move |i: u64| (i * chunk)..((i + 1) * chunk).min(total);
    #[cfg(feature = "parallel")]
    {
        (0..pieces)
            .into_par_iter()
            .map(|i| f(range(i)))
            .reduce(|| identity.clone(), &merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..pieces).map(|i| f(range(i))).fold(identity, merge)
    }
}

/// Whether this build evaluates in parallel.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
