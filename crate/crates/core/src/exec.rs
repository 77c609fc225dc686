//! Replicate orchestration behind an executor abstraction.
//!
//! Work is split into fixed-size chunks of consecutive replicate indices.
//! Each chunk folds its replicates in index order into a fresh accumulator
//! and chunks are merged in chunk order, so the result is the same for any
//! executor that returns chunk results in index order.

use alloc::vec::Vec;

use crate::stream::{derive_stream, Stream};

/// Replicates folded sequentially inside one work item.
pub const CHUNK: u64 = 256;

/// Runs `count` independent jobs and returns their results in index order.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Accumulator for [`fold_replicates`].
pub trait Accumulate: Send {
    fn merge(&mut self, other: Self);
}

/// Folds replicates `0..count`, replicate `i` drawing from
/// `derive_stream(seed, i)`.
pub fn fold_replicates<E, A, I, S>(exec: &E, seed: u64, count: u64, init: I, step: S) -> A
where
    E: Executor + ?Sized,
    A: Accumulate,
    I: Fn() -> A + Sync + Send,
    S: Fn(&mut A, &mut Stream, u64) + Sync + Send,
{
    let chunks = count.div_ceil(CHUNK) as usize;
    let parts = exec.map_indexed(chunks, |c| {
        let mut acc = init();
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(count);
        for i in start..end {
            let mut rng = derive_stream(seed, i);
            step(&mut acc, &mut rng, i);
        }
        acc
    });
    let mut total = init();
    for p in parts {
        total.merge(p);
    }
    total
}

/// Like [`fold_replicates`] but keeps every replicate's value, in order.
pub fn map_replicates<E, T, S>(exec: &E, seed: u64, count: u64, step: S) -> Vec<T>
where
    E: Executor + ?Sized,
    T: Send,
    S: Fn(&mut Stream, u64) -> T + Sync + Send,
{
    let chunks = count.div_ceil(CHUNK) as usize;
    let parts = exec.map_indexed(chunks, |c| {
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(count);
        (start..end)
            .map(|i| step(&mut derive_stream(seed, i), i))
            .collect::<Vec<T>>()
    });
    parts.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[derive(Default)]
    struct Sum(Vec<u64>);

    impl Accumulate for Sum {
        fn merge(&mut self, other: Self) {
            self.0.extend(other.0);
        }
    }

    #[test]
    fn fold_visits_every_replicate_in_order() {
        let acc = fold_replicates(&Sequential, 1, 1000, Sum::default, |a, _, i| a.0.push(i));
        assert_eq!(acc.0, (0..1000).collect::<Vec<_>>());
    }

    #[test]
    fn map_uses_derived_streams() {
        let v = map_replicates(&Sequential, 9, 300, |rng, _| rng.random::<u64>());
        assert_eq!(v.len(), 300);
        assert_eq!(v[299], derive_stream(9, 299).random::<u64>());
    }
}
