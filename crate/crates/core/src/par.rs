//! Data-parallel helpers. With the `parallel` feature (on by default) these
//! run on the rayon pool; without it they fall back to plain iterators with
//! identical results and output order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps every item, preserving input order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        map_parallel(items, f)
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_sequential(items, f)
    }
}

pub fn map_sequential<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_parallel<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    items.par_iter().map(f).collect()
}

/// Map-reduce with an associative, commutative `merge`.
pub fn map_reduce<T, A, M, I, R>(items: &[T], map: M, identity: I, merge: R) -> A
where
    T: Sync,
    A: Send,
    M: Fn(&T) -> A + Sync + Send,
    I: Fn() -> A + Sync + Send,
    R: Fn(A, A) -> A + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(map).reduce(identity, merge)
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(map).fold(identity(), merge)
    }
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
