//! Deterministic map-reduce over trial indices.
//!
//! Trials are grouped into fixed-size chunks. Each chunk folds its trials in
//! index order, chunk results are merged in chunk order, so the output does
//! not depend on the number of worker threads.

use rayon::prelude::*;

use crate::error::{Result, WalkError};

/// Trials per chunk. Part of the reproducibility contract: changing it
/// changes the merge order of floating-point accumulators.
pub const CHUNK: u64 = 256;

/// Worker-thread setting. `Threads(1)` runs strictly on the calling thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[derive(Default)]
pub enum Parallelism {
    /// rayon's global pool.
    #[default]
    Auto,
    Threads(usize),
}


impl Parallelism {
    pub fn from_threads(threads: Option<usize>) -> Self {
        match threads {
            None | Some(0) => Parallelism::Auto,
            Some(n) => Parallelism::Threads(n),
        }
    }
}

/// Folds `trial(i, &mut acc)` over `0..trials` and merges the chunk
/// accumulators with `merge` in chunk order.
pub fn fold_trials<A, F, M>(trials: u64, par: Parallelism, init: impl Fn() -> A + Sync, trial: F, merge: M) -> Result<A>
where
    A: Send,
    F: Fn(u64, &mut A) -> Result<()> + Sync,
    M: Fn(&mut A, A),
{
    let chunks = trials.div_ceil(CHUNK);
    let run_chunk = |c: u64| -> Result<A> {
        let mut acc = init();
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(trials);
        for i in lo..hi {
            trial(i, &mut acc)?;
        }
        Ok(acc)
    };
    let parts: Vec<Result<A>> = match par {
        Parallelism::Threads(1) => (0..chunks).map(run_chunk).collect(),
        Parallelism::Auto => (0..chunks).into_par_iter().map(run_chunk).collect(),
        Parallelism::Threads(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| WalkError::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
        }
    };
    let mut out = init();
    for part in parts {
        merge(&mut out, part?);
    }
    Ok(out)
}

/// Runs `f` on each index and returns results in index order.
pub fn map_indices<T, F>(n: u64, par: Parallelism, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
{
    fold_trials(
        n,
        par,
        Vec::new,
        |i, acc: &mut Vec<T>| {
            acc.push(f(i)?);
            Ok(())
        },
        |out, part| out.extend(part),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_is_thread_count_independent() {
        let sum = |par| {
            fold_trials(
                10_000,
                par,
                || 0.0f64,
                |i, acc| {
                    *acc += 1.0 / (i as f64 + 1.0);
                    Ok(())
                },
                |a, b| *a += b,
            )
            .unwrap()
        };
        let one = sum(Parallelism::Threads(1));
        assert_eq!(one.to_bits(), sum(Parallelism::Threads(4)).to_bits());
        assert_eq!(one.to_bits(), sum(Parallelism::Auto).to_bits());
    }

    #[test]
    fn map_keeps_order() {
        let v = map_indices(1000, Parallelism::Threads(3), |i| Ok(i * 2)).unwrap();
        assert_eq!(v, (0..1000).map(|i| i * 2).collect::<Vec<_>>());
    }

    #[test]
    fn errors_propagate() {
        let r = map_indices(600, Parallelism::Auto, |i| {
            if i == 500 {
                Err(WalkError::Overflow)
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(WalkError::Overflow));
    }
}
