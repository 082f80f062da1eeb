// SPDX-License-Identifier: Apache-2.0

//! Exact event-driven simulation of the finite-N system.
//!
//! The N layer-1 Poisson measures only act through their superposition, so
//! candidates are drawn from one homogeneous stream of rate
//! `Λ = N·sup f1 + sup f2` and classified at the pre-jump state:
//! layer-1 spike with probability `N f1(x⁻)/Λ`, layer-2 reset with
//! probability `f2(y⁻)/Λ`, rejected otherwise. Between candidates both
//! coordinates decay in closed form, so the simulation carries no
//! discretization error.

use alloc::vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::path::{check_grid, Discard, Event, Record, Sink, Trajectory};
use crate::rng;

/// State of the finite system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteState {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub n_particles: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteParams {
    pub n: u64,
    pub x0: f64,
    pub y0: f64,
    pub t_end: f64,
    /// Emit `Rejected` records for thinning candidates that were dropped.
    pub record_rejected: bool,
}

impl FiniteParams {
    pub fn new(n: u64, x0: f64, y0: f64, t_end: f64) -> Self {
        Self { n, x0, y0, t_end, record_rejected: false }
    }

    fn check(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter { name: "N", reason: "need at least one layer-1 neuron".into() });
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "t",
                reason: alloc::format!("t_end = {} must be finite and >= 0", self.t_end),
            });
        }
        if !(self.x0.is_finite() && self.y0.is_finite()) {
            return Err(Error::InvalidParameter { name: "x0/y0", reason: "initial condition must be finite".into() });
        }
        Ok(())
    }
}

/// Counts of each event kind over one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EventCounts {
    pub spikes: u64,
    pub resets: u64,
    pub rejected: u64,
}

/// Runs one path, streaming records into `sink`, and returns the final state.
pub fn run_finite<R, S>(
    model: &Model,
    p: &FiniteParams,
    grid: &[f64],
    rng: &mut R,
    sink: &mut S,
) -> Result<(FiniteState, EventCounts)>
where
    R: Rng + ?Sized,
    S: Sink,
{
    p.check()?;
    check_grid(grid, p.t_end)?;
    let n = p.n as f64;
    let inv_sqrt_n = 1.0 / crate::math::sqrt(n);
    let inv_n = 1.0 / n;
    let (a1, a2) = (model.alpha1, model.alpha2);
    let (f1, f2) = (&model.f1, &model.f2);
    let sup1 = f1.sup();
    let lambda = n * sup1 + f2.sup();

    let mut counts = EventCounts::default();
    let (mut t, mut x, mut y) = (0.0, p.x0, p.y0);
    let mut next_grid = grid.iter().copied().peekable();

    let draw_gap = |rng: &mut R| {
        if lambda > 0.0 {
            rng::exp1(rng) / lambda
        } else {
            f64::INFINITY
        }
    };
    let mut candidate = draw_gap(rng);

    loop {
        let g = next_grid.peek().copied().unwrap_or(f64::INFINITY);
        if g <= candidate && g <= p.t_end {
            let dt = g - t;
            x *= crate::math::exp(-a1 * dt);
            y *= crate::math::exp(-a2 * dt);
            t = g;
            sink.record(Record { t, x, y, event: Event::Grid });
            next_grid.next();
            continue;
        }
        if candidate > p.t_end {
            break;
        }
        let dt = candidate - t;
        x *= crate::math::exp(-a1 * dt);
        y *= crate::math::exp(-a2 * dt);
        t = candidate;

        let level = rng::uniform(rng) * lambda;
        let r1 = f1.eval(x);
        if r1 > sup1 {
            return Err(Error::BoundViolated { which: "f1", at: x, value: r1, sup: sup1 });
        }
        let spike_rate = n * r1;
        if level < spike_rate {
            let u = model.nu.sample(rng);
            let jump = u * inv_sqrt_n;
            x = x + jump - x * inv_n;
            y += jump;
            counts.spikes += 1;
            sink.record(Record { t, x, y, event: Event::Spike1 { mark: u } });
        } else {
            let r2 = f2.eval(y);
            if r2 > f2.sup() {
                return Err(Error::BoundViolated { which: "f2", at: y, value: r2, sup: f2.sup() });
            }
            if level < spike_rate + r2 {
                y = 0.0;
                counts.resets += 1;
                sink.record(Record { t, x, y, event: Event::Reset2 });
            } else {
                counts.rejected += 1;
                if p.record_rejected {
                    sink.record(Record { t, x, y, event: Event::Rejected });
                }
            }
        }
        candidate = t + draw_gap(rng);
    }

    if t < p.t_end {
        let dt = p.t_end - t;
        x *= crate::math::exp(-a1 * dt);
        y *= crate::math::exp(-a2 * dt);
        t = p.t_end;
    }
    Ok((FiniteState { t, x, y, n_particles: p.n }, counts))
}

/// Full trajectory of one path driven by stream `(seed, 0)`.
pub fn simulate_finite(model: &Model, p: &FiniteParams, grid: &[f64], seed: u64) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    run_finite(model, p, grid, &mut rng::replica_rng(seed, 0), &mut traj)?;
    Ok(traj)
}

/// Terminal state `(x_t, y_t)` of the path driven by `rng`.
#[inline]
pub fn terminal_sample_with<R: Rng + ?Sized>(model: &Model, p: &FiniteParams, rng: &mut R) -> Result<(f64, f64)> {
    // Sampling the single grid time t_end consumes the same draws as the
    // full simulation with grid = [t].
    let (state, _) = run_finite(model, p, &[p.t_end], rng, &mut Discard)?;
    Ok((state.x, state.y))
}

/// Terminal state of the path driven by stream `(seed, 0)`; equal to the
/// last grid record of [`simulate_finite`] with `grid = [t]`.
pub fn terminal_sample(model: &Model, p: &FiniteParams, seed: u64) -> Result<(f64, f64)> {
    terminal_sample_with(model, p, &mut rng::replica_rng(seed, 0))
}

/// Layer-1 spike count on `[0, t_end]` for the stream `(seed, replica)`.
pub fn spike_count(model: &Model, p: &FiniteParams, seed: u64, replica: u64) -> Result<u64> {
    let (_, counts) = run_finite(model, p, &[], &mut rng::replica_rng(seed, replica), &mut Discard)?;
    Ok(counts.spikes)
}

/// Uniform sampling grid with `points` intervals on `[0, t_end]`.
pub fn uniform_grid(t_end: f64, points: usize) -> alloc::vec::Vec<f64> {
    if points == 0 {
        return vec![t_end];
    }
    (0..=points).map(|i| if i == points { t_end } else { t_end * i as f64 / points as f64 }).collect()
}
