// SPDX-License-Identifier: Apache-2.0

//! Thread-pool runner. Values come back in replica order, so estimates do
//! not depend on the worker count.

use meanfield_core::runner::Runner;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuildError, ThreadPoolBuilder};

pub struct Parallel {
    pool: ThreadPool,
}

impl Parallel {
    /// `workers == 0` selects the number of available cores.
    pub fn new(workers: usize) -> Result<Self, ThreadPoolBuildError> {
        let workers = if workers == 0 { default_workers() } else { workers };
        Ok(Self { pool: ThreadPoolBuilder::new().num_threads(workers).build()? })
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl Runner for Parallel {
    fn map<T, F>(&self, reps: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        self.pool.install(|| (0..reps).into_par_iter().map(f).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use meanfield_core::runner::Sequential;

    #[test]
    fn preserves_replica_order() {
        let f = |r: u64| r.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 7;
        let expected = Sequential.map(10_000, f);
        for workers in [1, 3, 8] {
            assert_eq!(Parallel::new(workers).unwrap().map(10_000, f), expected);
        }
    }
}
