// SPDX-License-Identifier: Apache-2.0

//! Files, plots, parallel execution and the `meanfield` command line on top
//! of [`meanfield_core`].

pub mod cli;
pub mod config;
pub mod csv;
pub mod parallel;
pub mod svg;

pub use meanfield_core as core;
