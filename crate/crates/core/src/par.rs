//! Order-preserving maps over path indices.
//!
//! Results are always collected in path order, so downstream reductions do not
//! depend on how many worker threads ran the map.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// `(0..n).map(f)` with a per-worker scratch value built by `init`.
#[cfg(feature = "parallel")]
pub fn map_paths<S, T, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    T: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize) -> T + Sync + Send,
{
    (0..n).into_par_iter().map_init(init, |s, i| f(s, i)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_paths<S, T, I, F>(n: usize, init: I, f: F) -> Vec<T>
where
    I: Fn() -> S,
    F: Fn(&mut S, usize) -> T,
{
    let mut s = init();
    (0..n).map(|i| f(&mut s, i)).collect()
}

/// Fill `out` in rows of `row_len`, row `i` written by `f(scratch, i, row)`.
#[cfg(feature = "parallel")]
pub fn fill_rows<S, I, F>(out: &mut [f64], row_len: usize, init: I, f: F)
where
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [f64]) + Sync + Send,
{
    if row_len == 0 {
        return;
    }
    out.par_chunks_mut(row_len)
        .enumerate()
        .for_each_init(init, |s, (i, row)| f(s, i, row));
}

#[cfg(not(feature = "parallel"))]
pub fn fill_rows<S, I, F>(out: &mut [f64], row_len: usize, init: I, f: F)
where
    I: Fn() -> S,
    F: Fn(&mut S, usize, &mut [f64]),
{
    if row_len == 0 {
        return;
    }
    let mut s = init();
    for (i, row) in out.chunks_mut(row_len).enumerate() {
        f(&mut s, i, row);
    }
}

/// Fallible variant of [`fill_rows`]; returns the error of the lowest failing row.
pub fn try_fill_rows<S, E, I, F>(out: &mut [f64], row_len: usize, init: I, f: F) -> Result<(), E>
where
    E: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, usize, &mut [f64]) -> Result<(), E> + Sync + Send,
{
    if row_len == 0 {
        return Ok(());
    }
    let n = out.len() / row_len;
    let errors = std::sync::Mutex::new(Vec::<(usize, E)>::new());
    fill_rows(out, row_len, init, |s, i, row| {
        if let Err(e) = f(s, i, row) {
            errors.lock().unwrap().push((i, e));
        }
    });
    let mut errors = errors.into_inner().unwrap();
    debug_assert!(errors.iter().all(|(i, _)| *i < n));
    errors.sort_by_key(|(i, _)| *i);
    match errors.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}
