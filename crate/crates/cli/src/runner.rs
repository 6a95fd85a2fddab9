use rayon::prelude::*;
use rayon::ThreadPool;
use tcoal_core::harness::Runner;

/// Replicates spread over a fixed-size rayon pool. Results keep index order,
/// so output does not depend on the thread count.
pub struct PoolRunner {
    pool: ThreadPool,
}

impl PoolRunner {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        Ok(PoolRunner { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Runner for PoolRunner {
    fn map<T, F>(&self, count: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool.install(|| (0..count).into_par_iter().map(f).collect())
    }
}
