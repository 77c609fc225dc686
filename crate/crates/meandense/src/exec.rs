//! Thread-pool executor for the core replicate orchestration.

use meandense_core::exec::Executor;
use rayon::prelude::*;

/// Runs jobs on a dedicated rayon pool; results come back in index order.
#[derive(Debug)]
pub struct RayonExecutor {
    pool: rayon::ThreadPool,
}

impl RayonExecutor {
    /// `threads = 0` uses one thread per available core.
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        Ok(RayonExecutor { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Executor for RayonExecutor {
    fn map_indexed<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use meandense_core::exec::{map_replicates, Sequential};
    use rand::Rng;

    #[test]
    fn matches_sequential_order() {
        let pool = RayonExecutor::new(4).unwrap();
        assert_eq!(pool.threads(), 4);
        let a = map_replicates(&pool, 5, 2000, |rng, i| (i, rng.random::<u64>()));
        let b = map_replicates(&Sequential, 5, 2000, |rng, i| (i, rng.random::<u64>()));
        assert_eq!(a, b);
    }
}
