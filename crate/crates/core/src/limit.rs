// SPDX-License-Identifier: Apache-2.0

//! Weak simulation of the limit jump-diffusion and of its constant-rate
//! auxiliary process.
//!
//! Both coordinates share one Brownian increment per (sub)step. Reset
//! candidates come from a Poisson stream of rate `sup f2` and split the
//! Euler step they fall into, so jump times are exact; only the diffusion
//! carries discretization error. In [`JumpMode::Thinned`] a candidate at
//! `y⁻` resets with probability `f2(y⁻)/sup f2`; in [`JumpMode::AcceptAll`]
//! every candidate resets and the likelihood ratio back to the thinned law
//! is accumulated in log space.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::path::{check_grid, Discard, Event, Record, Sink, Trajectory};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitState {
    pub t: f64,
    pub xbar: f64,
    pub ybar: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitParams {
    pub x0: f64,
    pub y0: f64,
    pub t_end: f64,
    pub dt: f64,
}

impl LimitParams {
    pub fn new(x0: f64, y0: f64, t_end: f64, dt: f64) -> Self {
        Self { x0, y0, t_end, dt }
    }

    /// Uses the default step `min(1e-3, t_end / 1000)`.
    pub fn with_default_dt(x0: f64, y0: f64, t_end: f64) -> Self {
        Self::new(x0, y0, t_end, default_dt(t_end))
    }

    fn check(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter { name: "dt", reason: alloc::format!("dt = {} must be > 0", self.dt) });
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

    fn steps(&self) -> u64 {
        if self.t_end == 0.0 {
            return 0;
        }
        let ratio = self.t_end / self.dt;
        let rounded = crate::math::round(ratio);
        if crate::math::fabs(ratio - rounded) <= 1e-9 * ratio.max(1.0) {
            (rounded as u64).max(1)
        } else {
            crate::math::ceil(ratio) as u64
        }
    }
}

pub fn default_dt(t_end: f64) -> f64 {
    if t_end > 0.0 {
        (t_end / 1000.0).min(1e-3)
    } else {
        1e-3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpMode {
    /// Reset rate `f2(Ȳ)` by thinning (the limit process).
    Thinned,
    /// Reset rate `sup f2`, no thinning (the auxiliary process).
    AcceptAll,
}

/// Derivatives of the auxiliary flow with respect to the initial condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstVariation {
    pub t: f64,
    pub dx_dx: f64,
    pub dy_dx: f64,
    pub dy_dy: f64,
}

/// What the Euler driver reports besides the path records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerOutcome {
    pub state: LimitState,
    pub log_weight: f64,
    pub jumps: u64,
    pub variation: FirstVariation,
}

/// Observer of the auxiliary quantities at grid and jump times.
pub trait AuxSink: Sink {
    fn aux(&mut self, rec: &Record, log_weight: f64, variation: &FirstVariation);
}

impl AuxSink for Discard {
    #[inline]
    fn aux(&mut self, _: &Record, _: f64, _: &FirstVariation) {}
}

impl AuxSink for Trajectory {
    #[inline]
    fn aux(&mut self, _: &Record, _: f64, _: &FirstVariation) {}
}

#[derive(Debug, Clone, Copy)]
pub struct EulerOptions {
    pub mode: JumpMode,
    pub track_weight: bool,
    pub track_variation: bool,
}

/// Euler–Maruyama driver for the limit / auxiliary dynamics.
pub fn run_euler<R, S>(
    model: &Model,
    p: &LimitParams,
    opts: EulerOptions,
    grid: &[f64],
    rng: &mut R,
    sink: &mut S,
) -> Result<EulerOutcome>
where
    R: Rng + ?Sized,
    S: AuxSink,
{
    p.check()?;
    check_grid(grid, p.t_end)?;
    if opts.track_variation && !model.f1.is_differentiable() {
        return Err(Error::NotDifferentiable(model.f1.kind_name()));
    }
    let (a1, a2) = (model.alpha1, model.alpha2);
    let sigma = model.sigma();
    let (f1, f2) = (&model.f1, &model.f2);
    let sup2 = f2.sup();
    let n_steps = p.steps();

    let (mut x, mut y) = (p.x0, p.y0);
    let mut t = 0.0;
    let mut log_w = 0.0;
    let mut jumps = 0u64;
    let mut var = FirstVariation { t: 0.0, dx_dx: 1.0, dy_dx: 0.0, dy_dy: 1.0 };

    let draw_gap = |rng: &mut R| {
        if sup2 > 0.0 {
            rng::exp1(rng) / sup2
        } else {
            f64::INFINITY
        }
    };
    let mut candidate = draw_gap(rng);
    let mut gi = 0usize;

    // Grid times at 0 are emitted before any motion.
    while gi < grid.len() && grid[gi] <= 0.0 {
        let rec = Record { t: 0.0, x, y, event: Event::Grid };
        sink.aux(&rec, log_w, &var);
        sink.record(rec);
        gi += 1;
    }

    let mut step = 0u64;
    while step < n_steps {
        let t_next = if step + 1 == n_steps { p.t_end } else { (step + 1) as f64 * p.dt };
        loop {
            let g = grid.get(gi).copied().unwrap_or(f64::INFINITY);
            let stop = t_next.min(candidate).min(g);
            let h = stop - t;
            if h > 0.0 {
                let dw = crate::math::sqrt(h) * rng::standard_normal(rng);
                let r1 = f1.eval(x);
                let root = crate::math::sqrt(r1.max(0.0));
                let noise = sigma * root * dw;
                if opts.track_variation {
                    let slope = f1.first_derivative(x);
                    let root_slope = f1.sqrt_derivative(x);
                    let lin = sigma * root_slope * dw;
                    let dxx = var.dx_dx;
                    var.dx_dx = dxx - (a1 + r1 + x * slope) * dxx * h + dxx * lin;
                    var.dy_dx = var.dy_dx - a2 * var.dy_dx * h + dxx * lin;
                    var.dy_dy -= a2 * var.dy_dy * h;
                }
                if opts.track_weight {
                    log_w -= (f2.eval(y) - sup2) * h;
                }
                x = x - (a1 * x + x * r1) * h + noise;
                y = y - a2 * y * h + noise;
                if !(x.is_finite() && y.is_finite()) {
                    return Err(Error::NonFinite { step, t: stop });
                }
            }
            t = stop;
            var.t = t;
            while gi < grid.len() && grid[gi] <= t {
                let rec = Record { t, x, y, event: Event::Grid };
                sink.aux(&rec, log_w, &var);
                sink.record(rec);
                gi += 1;
            }
            if candidate <= t {
                let r2 = f2.eval(y);
                if r2 > sup2 {
                    return Err(Error::BoundViolated { which: "f2", at: y, value: r2, sup: sup2 });
                }
                let accept = match opts.mode {
                    JumpMode::AcceptAll => true,
                    JumpMode::Thinned => rng::uniform(rng) * sup2 < r2,
                };
                if accept {
                    if opts.track_weight {
                        log_w += crate::math::log(r2 / sup2);
                    }
                    y = 0.0;
                    var.dy_dx = 0.0;
                    var.dy_dy = 0.0;
                    jumps += 1;
                    let rec = Record { t, x, y, event: Event::Reset2 };
                    sink.aux(&rec, log_w, &var);
                    sink.record(rec);
                }
                candidate = t + draw_gap(rng);
            }
            if t >= t_next {
                break;
            }
        }
        step += 1;
    }
    Ok(EulerOutcome { state: LimitState { t, xbar: x, ybar: y }, log_weight: log_w, jumps, variation: var })
}

const LIMIT: EulerOptions = EulerOptions { mode: JumpMode::Thinned, track_weight: false, track_variation: false };

const AUXILIARY: EulerOptions = EulerOptions { mode: JumpMode::AcceptAll, track_weight: true, track_variation: false };

/// Limit-process trajectory with grid samples and reset records.
pub fn simulate_limit(model: &Model, p: &LimitParams, grid: &[f64], seed: u64) -> Result<Trajectory> {
    let mut traj = Trajectory::default();
    run_euler(model, p, LIMIT, grid, &mut rng::replica_rng(seed, 0), &mut traj)?;
    Ok(traj)
}

/// Terminal state of the limit process driven by `rng`.
#[inline]
pub fn limit_terminal_with<R: Rng + ?Sized>(model: &Model, p: &LimitParams, rng: &mut R) -> Result<(f64, f64)> {
    let out = run_euler(model, p, LIMIT, &[], rng, &mut Discard)?;
    Ok((out.state.xbar, out.state.ybar))
}

/// One record of an auxiliary path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxRecord {
    pub record: Record,
    /// Cumulative log-likelihood ratio up to `record.t`.
    pub log_weight: f64,
}

/// Auxiliary (constant reset rate) path and its likelihood weight.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuxPath {
    pub records: Vec<AuxRecord>,
    pub jump_times: Vec<f64>,
    pub log_weight: f64,
    pub terminal: (f64, f64),
}

impl AuxPath {
    /// `exp(log_weight)`
    pub fn weight(&self) -> f64 {
        crate::math::exp(self.log_weight)
    }
}

#[derive(Default)]
struct AuxCollector {
    records: Vec<AuxRecord>,
    jump_times: Vec<f64>,
}

impl Sink for AuxCollector {
    fn record(&mut self, _: Record) {}
}

impl AuxSink for AuxCollector {
    fn aux(&mut self, rec: &Record, log_weight: f64, _: &FirstVariation) {
        if rec.event == Event::Reset2 {
            self.jump_times.push(rec.t);
        }
        self.records.push(AuxRecord { record: *rec, log_weight });
    }
}

/// Auxiliary path driven by stream `(seed, 0)`.
pub fn simulate_auxiliary(model: &Model, p: &LimitParams, grid: &[f64], seed: u64) -> Result<AuxPath> {
    let mut sink = AuxCollector::default();
    let out = run_euler(model, p, AUXILIARY, grid, &mut rng::replica_rng(seed, 0), &mut sink)?;
    Ok(AuxPath {
        records: sink.records,
        jump_times: sink.jump_times,
        log_weight: out.log_weight,
        terminal: (out.state.xbar, out.state.ybar),
    })
}

/// Terminal auxiliary state and log weight for the path driven by `rng`.
#[inline]
pub fn auxiliary_terminal_with<R: Rng + ?Sized>(
    model: &Model,
    p: &LimitParams,
    rng: &mut R,
) -> Result<(f64, f64, f64)> {
    let out = run_euler(model, p, AUXILIARY, &[], rng, &mut Discard)?;
    Ok((out.state.xbar, out.state.ybar, out.log_weight))
}

#[derive(Default)]
struct VariationCollector {
    points: Vec<FirstVariation>,
}

impl Sink for VariationCollector {
    fn record(&mut self, _: Record) {}
}

impl AuxSink for VariationCollector {
    fn aux(&mut self, rec: &Record, _: f64, v: &FirstVariation) {
        if rec.event == Event::Grid {
            self.points.push(*v);
        }
    }
}

/// First variations along the auxiliary path of stream `(seed, 0)`,
/// sampled at `grid`, plus the terminal outcome.
pub fn simulate_first_variation(
    model: &Model,
    p: &LimitParams,
    grid: &[f64],
    seed: u64,
) -> Result<(Vec<FirstVariation>, EulerOutcome)> {
    let mut rng = rng::replica_rng(seed, 0);
    first_variation_with(model, p, grid, &mut rng)
}

pub fn first_variation_with<R: Rng + ?Sized>(
    model: &Model,
    p: &LimitParams,
    grid: &[f64],
    rng: &mut R,
) -> Result<(Vec<FirstVariation>, EulerOutcome)> {
    let opts = EulerOptions { mode: JumpMode::AcceptAll, track_weight: true, track_variation: true };
    let mut sink = VariationCollector::default();
    let out = run_euler(model, p, opts, grid, rng, &mut sink)?;
    Ok((sink.points, out))
}
