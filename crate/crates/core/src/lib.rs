// SPDX-License-Identifier: Apache-2.0

//! Simulation and numerical verification for a two-layer mean-field neuron
//! model.
//!
//! The finite system `(X^N, Y^N)` tracks the averaged potential of N
//! layer-1 neurons and one layer-2 neuron driven by layer-1 spikes of
//! size `u/√N` with `u ~ ν` centered. As N grows it approaches a
//! jump-diffusion `(X̄, Ȳ)` in which both coordinates share one Brownian
//! noise and `Ȳ` is reset to 0 at rate `f2(Ȳ)`.
//!
//! The crate provides:
//!
//! * [`finite`]: exact thinning simulation of the finite system,
//! * [`limit`]: Euler simulation of the limit, of the constant-reset-rate
//!   auxiliary process with its likelihood weight, and of first variations,
//! * [`generators`]: both infinitesimal generators, their gap and its bound,
//! * [`estimation`]: semigroup estimates, the convergence-rate study and
//!   moment checks.
//!
//! Everything is `no_std` + `alloc`. Parallel execution plugs in through
//! [`runner::Runner`]; results are identical for every runner.
#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod error;
pub mod estimation;
pub mod finite;
pub mod generators;
pub mod limit;
mod math;
pub mod model;
pub mod path;
pub mod quadrature;
pub mod rng;
pub mod runner;
pub mod stats;
pub mod testfn;

pub use error::{Error, Result};
pub use estimation::{Estimate, Query, RateOutcome, RateReport, StudyParams, System};
pub use finite::{simulate_finite, terminal_sample, FiniteParams};
pub use generators::{apply_abar, apply_an, generator_gap_bound, GeneratorReport, Generators};
pub use limit::{simulate_auxiliary, simulate_first_variation, simulate_limit, AuxPath, LimitParams};
pub use model::{JumpKind, JumpLaw, Model, ModelSpec, RateFunction, ValidationReport};
pub use path::{Event, Record, Trajectory};
pub use runner::{Runner, Sequential};
pub use testfn::TestFunction;
