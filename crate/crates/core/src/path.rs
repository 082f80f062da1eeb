// SPDX-License-Identifier: Apache-2.0

//! Trajectory records shared by the finite-N and limit simulators.

use alloc::vec::Vec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Event {
    /// State sampled at a requested grid time.
    Grid,
    /// Layer-1 spike with its synaptic mark `u`.
    Spike1 { mark: f64 },
    /// Layer-2 reset, `y == 0` afterwards.
    Reset2,
    /// Thinning candidate that was rejected (debug output only).
    Rejected,
}

impl Event {
    pub fn label(&self) -> &'static str {
        match self {
            Event::Grid => "grid",
            Event::Spike1 { .. } => "spike1",
            Event::Reset2 => "reset2",
            Event::Rejected => "rejected",
        }
    }

    pub fn mark(&self) -> Option<f64> {
        match self {
            Event::Spike1 { mark } => Some(*mark),
            _ => None,
        }
    }
}

/// State right after `event` (right limit at jump times).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Record {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub event: Event,
}

/// Receives the records a simulator emits.
pub trait Sink {
    fn record(&mut self, rec: Record);
}

/// Ignores everything; used on Monte Carlo hot paths.
#[derive(Debug, Default, Clone, Copy)]
pub struct Discard;

impl Sink for Discard {
    #[inline]
    fn record(&mut self, _rec: Record) {}
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub records: Vec<Record>,
}

impl Sink for Trajectory {
    fn record(&mut self, rec: Record) {
        self.records.push(rec);
    }
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn grid(&self) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(|r| r.event == Event::Grid)
    }

    pub fn count(&self, label: &str) -> usize {
        self.records.iter().filter(|r| r.event.label() == label).count()
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }
}

/// Checks that a sampling grid is sorted and inside `[0, t_end]`.
pub(crate) fn check_grid(grid: &[f64], t_end: f64) -> crate::Result<()> {
    let sorted = grid.windows(2).all(|w| w[0] <= w[1]);
    let inside = grid.iter().all(|&t| t >= 0.0 && t <= t_end);
    if sorted && inside {
        Ok(())
    } else {
        Err(crate::Error::InvalidParameter {
            name: "grid",
            reason: alloc::format!("grid times must be sorted and lie in [0, {t_end}]"),
        })
    }
}
