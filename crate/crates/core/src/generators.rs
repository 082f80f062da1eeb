// SPDX-License-Identifier: Apache-2.0

//! Pointwise generators of the finite-N system and of the limit process,
//! their gap, and the analytic bound on that gap.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::estimation::System;
use crate::finite::{run_finite, uniform_grid, FiniteParams};
use crate::limit::{run_euler, EulerOptions, FirstVariation, JumpMode, LimitParams};
use crate::model::{JumpRule, Model, QUADRATURE_NODES};
use crate::path::{Event, Record, Sink};
use crate::rng;
use crate::runner::Runner;
use crate::stats::mean_stderr;
use crate::testfn::{multi_indices, Kind, TestFunction};

/// Generator evaluator with a precomputed ν-integration rule.
#[derive(Debug, Clone)]
pub struct Generators<'m> {
    model: &'m Model,
    rule: JumpRule,
}

impl<'m> Generators<'m> {
    pub fn new(model: &'m Model) -> Self {
        Self::with_nodes(model, QUADRATURE_NODES)
    }

    pub fn with_nodes(model: &'m Model, nodes: usize) -> Self {
        Self { model, rule: model.nu.rule(nodes) }
    }

    pub fn model(&self) -> &Model {
        self.model
    }

    /// Limit generator `Ā g(x, y)`.
    pub fn apply_abar(&self, g: &TestFunction, x: f64, y: f64) -> f64 {
        let m = self.model;
        let f1 = m.f1.eval(x);
        let dx = g.partial(1, 0, x, y);
        let dy = g.partial(0, 1, x, y);
        let hess = g.partial(2, 0, x, y) + 2.0 * g.partial(1, 1, x, y) + g.partial(0, 2, x, y);
        let sigma2 = m.nu.variance();
        -m.alpha1 * x * dx - x * f1 * dx - m.alpha2 * y * dy
            + 0.5 * sigma2 * f1 * hess
            + m.f2.eval(y) * g.increment(x, y, 0.0, -y)
    }

    /// Finite-N generator `A^N g(x, y)`.
    pub fn apply_an(&self, n: u64, g: &TestFunction, x: f64, y: f64) -> f64 {
        let m = self.model;
        let nf = n as f64;
        let inv_sqrt_n = 1.0 / crate::math::sqrt(nf);
        let shift = x / nf;
        let f1 = m.f1.eval(x);
        let jump = if f1 == 0.0 {
            0.0
        } else {
            let integral = self.rule.integrate(|u| {
                let b = u * inv_sqrt_n;
                g.increment(x, y, b - shift, b)
            });
            nf * f1 * integral
        };
        -m.alpha1 * x * g.partial(1, 0, x, y) - m.alpha2 * y * g.partial(0, 1, x, y)
            + jump
            + m.f2.eval(y) * g.increment(x, y, 0.0, -y)
    }

    /// Signed `A^N g - Ā g`.
    ///
    /// For polynomial `g` (degree at most 3) this is the Taylor remainder
    /// beyond second order integrated in closed form against the moments of
    /// ν, which avoids subtracting two nearly equal generator values. The
    /// shipped jump laws are symmetric, so their odd moments vanish.
    pub fn difference(&self, n: u64, g: &TestFunction, x: f64, y: f64) -> f64 {
        if !matches!(g.kind(), Kind::Polynomial { .. }) {
            return self.apply_an(n, g, x, y) - self.apply_abar(g, x, y);
        }
        let m = self.model;
        let nf = n as f64;
        let f1 = m.f1.eval(x);
        if f1 == 0.0 {
            return 0.0;
        }
        // jump (dx, dy) = (b - s, b) with b = u/√N
        let s = x / nf;
        let v = m.nu.variance() / nf;
        let e_dx3 = -3.0 * s * v - s * s * s;
        let e_dx2dy = -2.0 * s * v;
        let e_dxdy2 = -s * v;
        let second = 0.5 * s * s * g.partial(2, 0, x, y);
        let third = (e_dx3 * g.partial(3, 0, x, y)
            + 3.0 * e_dx2dy * g.partial(2, 1, x, y)
            + 3.0 * e_dxdy2 * g.partial(1, 2, x, y))
            / 6.0;
        nf * f1 * (second + third)
    }

    /// `(1/6) f1(x) N^{-1/2} E|u|³ Σ_{|β|=3} ‖∂_β g‖∞ + (1/2) x² f1(x) N^{-1} ‖∂²₁₁ g‖∞`
    pub fn gap_bound(&self, n: u64, g: &TestFunction, x: f64) -> Result<f64> {
        let m = self.model;
        let nf = n as f64;
        let f1 = m.f1.eval(x);
        let mut third = 0.0;
        for (i, j) in multi_indices(3) {
            third += g.sup_norm(i, j)?;
        }
        let d11 = g.sup_norm(2, 0)?;
        Ok(f1 * m.nu.third_abs_moment() * third / (6.0 * crate::math::sqrt(nf)) + 0.5 * x * x * f1 * d11 / nf)
    }

    pub fn report(&self, n: u64, g: &TestFunction, x: f64, y: f64) -> Result<GeneratorReport> {
        let value_an = self.apply_an(n, g, x, y);
        let value_abar = self.apply_abar(g, x, y);
        let gap = crate::math::fabs(self.difference(n, g, x, y));
        let bound = self.gap_bound(n, g, x)?;
        Ok(GeneratorReport {
            x,
            y,
            n,
            value_an,
            value_abar,
            gap,
            bound,
            bound_satisfied: gap <= bound * (1.0 + BOUND_RTOL),
        })
    }
}

pub fn apply_abar(model: &Model, g: &TestFunction, x: f64, y: f64) -> f64 {
    Generators::new(model).apply_abar(g, x, y)
}

pub fn apply_an(model: &Model, n: u64, g: &TestFunction, x: f64, y: f64) -> f64 {
    Generators::new(model).apply_an(n, g, x, y)
}

pub fn generator_gap_bound(model: &Model, n: u64, g: &TestFunction, x: f64) -> Result<f64> {
    Generators::new(model).gap_bound(n, g, x)
}

/// Relative rounding allowance when comparing the gap with its bound; the
/// two coincide exactly for `g = x²`.
pub const BOUND_RTOL: f64 = 1e-12;

/// One point of a generator comparison; `gap` is `|difference|`, not the
/// rounded difference of the two reported values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneratorReport {
    pub x: f64,
    pub y: f64,
    pub n: u64,
    pub value_an: f64,
    pub value_abar: f64,
    pub gap: f64,
    pub bound: f64,
    pub bound_satisfied: bool,
}

/// Both sides of `E g(Z_t) - g(z) = E ∫₀ᵗ A g(Z_s) ds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynkinReport {
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub rhs_stderr: f64,
    /// `sqrt(lhs_stderr² + rhs_stderr²)`
    pub combined_stderr: f64,
    /// Standard error of the per-replica difference.
    pub paired_stderr: f64,
    pub reps: u64,
}

impl DynkinReport {
    pub fn discrepancy(&self) -> f64 {
        crate::math::fabs(self.lhs - self.rhs)
    }
}

#[derive(Default)]
struct GridStates(Vec<(f64, f64)>);

impl Sink for GridStates {
    fn record(&mut self, rec: Record) {
        if rec.event == Event::Grid {
            self.0.push((rec.x, rec.y));
        }
    }
}

impl crate::limit::AuxSink for GridStates {
    fn aux(&mut self, _: &Record, _: f64, _: &FirstVariation) {}
}

#[derive(Debug, Clone, Copy)]
pub struct DynkinParams {
    pub x0: f64,
    pub y0: f64,
    pub t: f64,
    pub reps: u64,
    /// Intervals of the sampling grid used by the trapezoid rule.
    pub intervals: usize,
    pub seed: u64,
}

/// Monte Carlo check of Dynkin's formula; the time integral is a trapezoid
/// rule over a uniform sampling grid.
pub fn dynkin_check<R: Runner>(
    model: &Model,
    system: System,
    g: &TestFunction,
    p: &DynkinParams,
    runner: &R,
) -> Result<DynkinReport> {
    if p.reps < 2 {
        return Err(Error::InvalidParameter { name: "reps", reason: "need at least 2 replicas".into() });
    }
    let gens = Generators::new(model);
    let grid = uniform_grid(p.t, p.intervals.max(1));
    let g0 = g.value(p.x0, p.y0);
    let pairs = runner.try_map(p.reps, |r| {
        let mut rng = rng::replica_rng(p.seed, r);
        let mut states = GridStates::default();
        let vals: Vec<f64> = match system {
            System::Finite { n } => {
                let fp = FiniteParams::new(n, p.x0, p.y0, p.t);
                run_finite(model, &fp, &grid, &mut rng, &mut states)?;
                states.0.iter().map(|&(x, y)| gens.apply_an(n, g, x, y)).collect()
            }
            System::Limit { dt } => {
                let lp = LimitParams::new(p.x0, p.y0, p.t, dt);
                let opts = EulerOptions { mode: JumpMode::Thinned, track_weight: false, track_variation: false };
                run_euler(model, &lp, opts, &grid, &mut rng, &mut states)?;
                states.0.iter().map(|&(x, y)| gens.apply_abar(g, x, y)).collect()
            }
        };
        let mut integral = 0.0;
        for (w, s) in vals.windows(2).zip(grid.windows(2)) {
            integral += 0.5 * (w[0] + w[1]) * (s[1] - s[0]);
        }
        let (xt, yt) = *states.0.last().expect("grid ends at t");
        Ok((g.value(xt, yt) - g0, integral))
    })?;
    let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let (lm, ls) = mean_stderr(&lhs);
    let (rm, rs) = mean_stderr(&rhs);
    let (_, ds) = mean_stderr(&diff);
    Ok(DynkinReport {
        lhs: lm,
        lhs_stderr: ls,
        rhs: rm,
        rhs_stderr: rs,
        combined_stderr: crate::math::sqrt(ls * ls + rs * rs),
        paired_stderr: ds,
        reps: p.reps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{JumpLaw, ModelSpec};
    use crate::testfn::NormBox;
    use approx::assert_relative_eq;

    #[test]
    fn abar_on_polynomials() {
        let m = Model::figure1();
        let gens = Generators::new(&m);
        let (x, y) = (0.7, -1.3);
        let f1 = m.f1.eval(x);
        let f2 = m.f2.eval(y);
        assert_relative_eq!(gens.apply_abar(&TestFunction::x(), x, y), -x - x * f1, max_relative = 1e-14);
        assert_relative_eq!(gens.apply_abar(&TestFunction::y(), x, y), -y - y * f2, max_relative = 1e-14);
        assert_relative_eq!(
            gens.apply_abar(&TestFunction::x_squared(), x, y),
            -2.0 * x * x - 2.0 * x * x * f1 + f1,
            max_relative = 1e-14
        );
    }

    #[test]
    fn an_on_x_squared() {
        for nu in [JumpLaw::gaussian(1.3), JumpLaw::rademacher(0.8), JumpLaw::centered_uniform(2.0)] {
            let mut spec = ModelSpec::figure1();
            spec.nu = nu;
            spec.alpha1 = 0.6;
            let m = Model::new(spec).unwrap();
            let gens = Generators::new(&m);
            for &n in &[1u64, 7, 100] {
                let (x, y) = (1.1, 0.4);
                let f1 = m.f1.eval(x);
                let nf = n as f64;
                let expected = -2.0 * 0.6 * x * x + f1 * (nu.variance() - 2.0 * x * x + x * x / nf);
                assert_relative_eq!(gens.apply_an(n, &TestFunction::x_squared(), x, y), expected, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn gap_bound_equality_for_x_squared() {
        let m = Model::figure1();
        let gens = Generators::new(&m);
        let g = TestFunction::x_squared().with_norm_box(NormBox { x: (-3.0, 3.0), y: (-3.0, 3.0) });
        let (x, n) = (1.7, 10u64);
        let rep = gens.report(n, &g, x, 0.2).unwrap();
        let expected = m.f1.eval(x) * x * x / n as f64;
        assert_relative_eq!(rep.gap, expected, max_relative = 1e-12);
        assert_relative_eq!(rep.bound, expected, max_relative = 1e-15);
    }

    #[test]
    fn linear_functions_have_zero_bound() {
        let m = Model::figure1();
        assert_eq!(generator_gap_bound(&m, 10, &TestFunction::x(), 0.5).unwrap(), 0.0);
        assert_eq!(generator_gap_bound(&m, 10, &TestFunction::one(), -2.0).unwrap(), 0.0);
    }

    #[test]
    fn quadrature_converged_at_64_nodes() {
        // Integrands built from tanh have poles at distance ~ √N·π/(2·scale)
        // from the real axis, so convergence is only fast once N >= 10.
        let m = Model::figure1();
        let g64 = Generators::with_nodes(&m, 64);
        let g128 = Generators::with_nodes(&m, 128);
        for g in TestFunction::bounded_catalog() {
            for &n in &[10u64, 100, 1000] {
                for i in 0..=20 {
                    for j in 0..=20 {
                        let (x, y) = (-3.0 + 0.3 * f64::from(i), -3.0 + 0.3 * f64::from(j));
                        let a = g64.apply_an(n, &g, x, y);
                        let b = g128.apply_an(n, &g, x, y);
                        assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "{} n={n}: {a} vs {b}", g.name());
                    }
                }
            }
        }
    }
}
