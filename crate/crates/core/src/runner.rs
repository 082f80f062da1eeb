// SPDX-License-Identifier: Apache-2.0

//! Replica execution.
//!
//! A runner maps a replica index to a value and returns the values in index
//! order. Reductions happen afterwards, sequentially, so results never
//! depend on how a runner schedules the work.

use alloc::vec::Vec;

use crate::error::Result;

pub trait Runner: Sync {
    /// `[f(0), f(1), …, f(reps - 1)]`, in that order.
    fn map<T, F>(&self, reps: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send;

    /// Like `map`, failing with the lowest-index error.
    fn try_map<T, F>(&self, reps: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64) -> Result<T> + Sync + Send,
    {
        self.map(reps, f).into_iter().collect()
    }
}

/// Runs replicas one after the other on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sequential;

impl Runner for Sequential {
    fn map<T, F>(&self, reps: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        (0..reps).map(f).collect()
    }
}
