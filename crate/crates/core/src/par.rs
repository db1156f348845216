//! Data-parallel helpers with a sequential fallback.
//!
//! Every helper returns results in index order, so output is bit-identical
//! whichever execution mode is active. With the `parallel` feature disabled
//! all work runs on the calling thread.

use std::sync::atomic::{AtomicU8, Ordering};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Parallel,
    Sequential,
}

static MODE: AtomicU8 = AtomicU8::new(0);

/// Selects how subsequent sweeps and assemblies are scheduled.
pub fn set_execution(mode: Execution) {
    MODE.store(
        match mode {
            Execution::Parallel => 0,
            Execution::Sequential => 1,
        },
        Ordering::Relaxed,
    );
    faer::set_global_parallelism(match effective(mode) {
        Execution::Parallel => faer::Par::rayon(0),
        Execution::Sequential => faer::Par::Seq,
    });
}

pub fn execution() -> Execution {
    effective(match MODE.load(Ordering::Relaxed) {
        0 => Execution::Parallel,
        _ => Execution::Sequential,
    })
}

fn effective(mode: Execution) -> Execution {
    if cfg!(feature = "parallel") {
        mode
    } else {
        Execution::Sequential
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel.
pub fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match execution() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => (0..n).into_par_iter().map(f).collect(),
        _ => (0..n).map(f).collect(),
    }
}

/// Maps a slice, preserving order.
pub fn map_slice<S, T, F>(items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    match execution() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

/// Fills consecutive rows of a row-major buffer of width `width`.
pub fn fill_rows<F>(buf: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    match execution() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => buf
            .par_chunks_mut(width)
            .enumerate()
            .for_each(|(i, row)| f(i, row)),
        _ => buf
            .chunks_mut(width)
            .enumerate()
            .for_each(|(i, row)| f(i, row)),
    }
}
