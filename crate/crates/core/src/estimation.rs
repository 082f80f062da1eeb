// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo semigroup estimates, the empirical convergence-rate study and
//! the moment checks.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::finite::{terminal_sample_with, FiniteParams};
use crate::limit::{auxiliary_terminal_with, limit_terminal_with, run_euler, EulerOptions, JumpMode, LimitParams};
use crate::model::Model;
use crate::path::{Event, Record, Sink};
use crate::rng::{self, derive_seed};
use crate::runner::Runner;
use crate::stats::{fit_line, mean_stderr};
use crate::testfn::TestFunction;

/// Which process a Monte Carlo functional is taken under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum System {
    Finite { n: u64 },
    Limit { dt: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Exact finite-N simulation.
    Finite { n: u64 },
    /// Euler scheme for the limit process (bias O(dt)).
    Limit { dt: f64 },
    /// Auxiliary process reweighted by the likelihood ratio (bias O(dt)).
    Girsanov { dt: f64 },
}

/// Everything an estimate depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDigest {
    pub model: u64,
    pub estimator: Estimator,
    pub g: String,
    pub x0: f64,
    pub y0: f64,
    pub t: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// Sample standard deviation over √reps.
    pub stderr: f64,
    pub reps: u64,
    pub digest: ConfigDigest,
}

impl Estimate {
    fn from_values(values: &[f64], digest: ConfigDigest) -> Self {
        let (mean, stderr) = mean_stderr(values);
        Self { mean, stderr, reps: values.len() as u64, digest }
    }

    /// `sqrt(se_a² + se_b²)`
    pub fn combined_stderr(&self, other: &Estimate) -> f64 {
        crate::math::sqrt(self.stderr * self.stderr + other.stderr * other.stderr)
    }
}

/// Initial condition, horizon, replica count and master seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Query {
    pub x0: f64,
    pub y0: f64,
    pub t: f64,
    pub reps: u64,
    pub seed: u64,
}

impl Query {
    fn check(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::InvalidParameter { name: "reps", reason: "need at least 2 replicas".into() });
        }
        Ok(())
    }

    fn digest(&self, model: &Model, estimator: Estimator, g: &TestFunction) -> ConfigDigest {
        ConfigDigest {
            model: model.fingerprint(),
            estimator,
            g: g.name().to_string(),
            x0: self.x0,
            y0: self.y0,
            t: self.t,
            seed: self.seed,
        }
    }
}

/// `P^N_t g(x0, y0)` from exact finite-system replicas.
pub fn estimate_semigroup_finite<R: Runner>(
    model: &Model,
    n: u64,
    g: &TestFunction,
    q: &Query,
    runner: &R,
) -> Result<Estimate> {
    q.check()?;
    let p = FiniteParams::new(n, q.x0, q.y0, q.t);
    let values = runner.try_map(q.reps, |r| {
        let (x, y) = terminal_sample_with(model, &p, &mut rng::replica_rng(q.seed, r))?;
        Ok(g.value(x, y))
    })?;
    Ok(Estimate::from_values(&values, q.digest(model, Estimator::Finite { n }, g)))
}

/// `P̄_t g(x0, y0)` from Euler replicas of the limit process.
pub fn estimate_semigroup_limit<R: Runner>(
    model: &Model,
    g: &TestFunction,
    q: &Query,
    dt: f64,
    runner: &R,
) -> Result<Estimate> {
    q.check()?;
    let p = LimitParams::new(q.x0, q.y0, q.t, dt);
    let values = runner.try_map(q.reps, |r| {
        let (x, y) = limit_terminal_with(model, &p, &mut rng::replica_rng(q.seed, r))?;
        Ok(g.value(x, y))
    })?;
    Ok(Estimate::from_values(&values, q.digest(model, Estimator::Limit { dt }, g)))
}

/// `E[g(X̃_t, Ỹ_t) · L_t]` over auxiliary paths, `L_t` the likelihood ratio.
pub fn girsanov_estimate<R: Runner>(
    model: &Model,
    g: &TestFunction,
    q: &Query,
    dt: f64,
    runner: &R,
) -> Result<Estimate> {
    q.check()?;
    let p = LimitParams::new(q.x0, q.y0, q.t, dt);
    let values = runner.try_map(q.reps, |r| {
        let (x, y, log_w) = auxiliary_terminal_with(model, &p, &mut rng::replica_rng(q.seed, r))?;
        Ok(g.value(x, y) * crate::math::exp(log_w))
    })?;
    Ok(Estimate::from_values(&values, q.digest(model, Estimator::Girsanov { dt }, g)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyParams {
    pub x0: f64,
    pub y0: f64,
    pub t: f64,
    pub n_list: Vec<u64>,
    /// Replicas per finite-N estimate.
    pub reps: u64,
    /// Replicas for the limit estimate; at least `4 * reps`.
    pub reps_limit: u64,
    /// Euler step for the limit estimate; at most `1e-4 * t`.
    pub dt: f64,
    pub seed: u64,
}

impl StudyParams {
    pub fn new(x0: f64, y0: f64, t: f64, n_list: Vec<u64>, reps: u64, seed: u64) -> Self {
        Self { x0, y0, t, n_list, reps, reps_limit: 4 * reps, dt: 1e-4 * t, seed }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RatePoint {
    pub n: u64,
    pub finite: Estimate,
    /// `|mean_N - mean_limit|`
    pub error: f64,
    pub combined_stderr: f64,
    /// `error <= 3 · combined_stderr`
    pub noise_dominated: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateOutcome {
    /// Least-squares slope of `ln e_N` on `ln N` with a 95% interval.
    Fitted { slope: f64, ci_lo: f64, ci_hi: f64, points_used: usize },
    /// Fewer than three points rose above the noise floor.
    Inconclusive { points_used: usize },
}

/// Empirical convergence rate of the finite-N semigroup to the limit one.
///
/// Only the exponent is measured. The `N^{-1}(1 + x²)` correction of the
/// error bound cannot be separated from the leading term at reachable
/// replica counts and is not fitted.
#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub limit: Estimate,
    pub points: Vec<RatePoint>,
    pub outcome: RateOutcome,
}

impl RateReport {
    pub fn is_conclusive(&self) -> bool {
        matches!(self.outcome, RateOutcome::Fitted { .. })
    }
}

/// Tag of the limit sub-run in seed derivation; finite runs use their N.
const LIMIT_TAG: u64 = u64::MAX;

pub fn convergence_study<R: Runner>(
    model: &Model,
    g: &TestFunction,
    p: &StudyParams,
    runner: &R,
) -> Result<RateReport> {
    if !g.is_bounded_smooth() {
        return Err(Error::InvalidParameter {
            name: "g",
            reason: alloc::format!("`{}` is not a bounded-smooth test function", g.name()),
        });
    }
    let lo = p.n_list.iter().copied().min().unwrap_or(0);
    let hi = p.n_list.iter().copied().max().unwrap_or(0);
    if p.n_list.len() < 4 || lo == 0 || hi < 4 * lo {
        return Err(Error::InvalidParameter {
            name: "n_list",
            reason: "need at least 4 values of N >= 1 spanning two octaves".into(),
        });
    }
    if p.reps_limit < 4 * p.reps {
        return Err(Error::InvalidParameter { name: "reps_limit", reason: "must be at least 4 × reps".into() });
    }
    let dt = p.dt.min(1e-4 * p.t);

    let lq = Query { x0: p.x0, y0: p.y0, t: p.t, reps: p.reps_limit, seed: derive_seed(p.seed, LIMIT_TAG) };
    let limit = estimate_semigroup_limit(model, g, &lq, dt, runner)?;

    let mut points = Vec::with_capacity(p.n_list.len());
    for &n in &p.n_list {
        let q = Query { x0: p.x0, y0: p.y0, t: p.t, reps: p.reps, seed: derive_seed(p.seed, n) };
        let finite = estimate_semigroup_finite(model, n, g, &q, runner)?;
        let error = crate::math::fabs(finite.mean - limit.mean);
        let combined_stderr = finite.combined_stderr(&limit);
        points.push(RatePoint { n, finite, error, combined_stderr, noise_dominated: error <= 3.0 * combined_stderr });
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|pt| !pt.noise_dominated)
        .map(|pt| (crate::math::log(pt.n as f64), crate::math::log(pt.error)))
        .unzip();
    let used = xs.len();
    let outcome = match fit_line(&xs, &ys) {
        Some(fit) if used >= 3 => {
            let (ci_lo, ci_hi) = fit.slope_ci(0.95);
            RateOutcome::Fitted { slope: fit.slope, ci_lo, ci_hi, points_used: used }
        }
        _ => RateOutcome::Inconclusive { points_used: used },
    };
    Ok(RateReport { limit, points, outcome })
}

/// `(x0² + σ² sup f1 · t) e^t`
pub fn finite_second_moment_bound(model: &Model, x0: f64, t: f64) -> f64 {
    (x0 * x0 + model.nu.variance() * model.f1.sup() * t) * crate::math::exp(t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub n: u64,
    pub t: f64,
    /// Estimate of `E[(X^N_t)²]`.
    pub estimate: Estimate,
    pub bound: f64,
    /// `estimate <= bound + 3 · stderr`
    pub passed: bool,
}

pub fn moment_check<R: Runner>(
    model: &Model,
    n: u64,
    x0: f64,
    t: f64,
    reps: u64,
    seed: u64,
    runner: &R,
) -> Result<MomentReport> {
    let square = TestFunction::x_squared();
    let q = Query { x0, y0: 0.0, t, reps, seed };
    let estimate = estimate_semigroup_finite(model, n, &square, &q, runner)?;
    let bound = finite_second_moment_bound(model, x0, t);
    let passed = estimate.mean <= bound + 3.0 * estimate.stderr;
    Ok(MomentReport { n, t, estimate, bound, passed })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentRow {
    pub t: f64,
    pub x2: f64,
    pub x2_stderr: f64,
    pub y2: f64,
    pub y2_stderr: f64,
}

/// Second moments of the limit process along a time grid. No bound is
/// asserted; the report fails only on non-finite moments.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitMomentReport {
    pub rows: Vec<MomentRow>,
    pub finite: bool,
}

#[derive(Default)]
struct Squares(Vec<(f64, f64)>);

impl Sink for Squares {
    fn record(&mut self, rec: Record) {
        if rec.event == Event::Grid {
            self.0.push((rec.x * rec.x, rec.y * rec.y));
        }
    }
}

impl crate::limit::AuxSink for Squares {
    fn aux(&mut self, _: &Record, _: f64, _: &crate::limit::FirstVariation) {}
}

#[allow(clippy::too_many_arguments)]
pub fn limit_moment_check<R: Runner>(
    model: &Model,
    x0: f64,
    y0: f64,
    times: &[f64],
    reps: u64,
    dt: f64,
    seed: u64,
    runner: &R,
) -> Result<LimitMomentReport> {
    if reps < 2 {
        return Err(Error::InvalidParameter { name: "reps", reason: "need at least 2 replicas".into() });
    }
    let t_end = times.iter().copied().fold(0.0, f64::max);
    let p = LimitParams::new(x0, y0, t_end, dt);
    let opts = EulerOptions { mode: JumpMode::Thinned, track_weight: false, track_variation: false };
    let per_rep = runner.try_map(reps, |r| {
        let mut sink = Squares::default();
        run_euler(model, &p, opts, times, &mut rng::replica_rng(seed, r), &mut sink)?;
        Ok(sink.0)
    })?;
    let mut rows = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let xs: Vec<f64> = per_rep.iter().map(|v| v[k].0).collect();
        let ys: Vec<f64> = per_rep.iter().map(|v| v[k].1).collect();
        let (x2, x2_stderr) = mean_stderr(&xs);
        let (y2, y2_stderr) = mean_stderr(&ys);
        rows.push(MomentRow { t, x2, x2_stderr, y2, y2_stderr });
    }
    let finite = rows.iter().all(|r| r.x2.is_finite() && r.y2.is_finite());
    Ok(LimitMomentReport { rows, finite })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ModelSpec, RateFunction};
    use crate::runner::Sequential;

    fn quiet_model() -> Model {
        let mut spec = ModelSpec::figure1();
        spec.f1 = RateFunction::constant(0.0);
        spec.f2 = RateFunction::constant(0.0);
        Model::new(spec).unwrap()
    }

    #[test]
    fn deterministic_finite_estimate() {
        let m = quiet_model();
        let q = Query { x0: 1.0, y0: 0.0, t: 1.0, reps: 10, seed: 1 };
        let est = estimate_semigroup_finite(&m, 5, &TestFunction::x(), &q, &Sequential).unwrap();
        assert_eq!(est.mean, crate::math::exp(-1.0));
        assert_eq!(est.stderr, 0.0);
        let one = estimate_semigroup_finite(&Model::figure1(), 5, &TestFunction::one(), &q, &Sequential).unwrap();
        assert_eq!((one.mean, one.stderr), (1.0, 0.0));
    }

    #[test]
    fn deterministic_limit_estimate() {
        let m = quiet_model();
        let q = Query { x0: 0.0, y0: 2.0, t: 1.0, reps: 4, seed: 1 };
        let est = estimate_semigroup_limit(&m, &TestFunction::y(), &q, 1e-3, &Sequential).unwrap();
        assert!((est.mean - 2.0 * crate::math::exp(-1.0)).abs() < 2e-3);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn moment_bound_at_time_zero() {
        let m = Model::figure1();
        let rep = moment_check(&m, 10, 1.5, 0.0, 1000, 3, &Sequential).unwrap();
        assert_eq!(rep.estimate.mean, 2.25);
        assert_eq!(rep.bound, 2.25);
        assert!(rep.passed);
    }

    #[test]
    fn figure1_bound_value() {
        let b = finite_second_moment_bound(&Model::figure1(), 0.0, 1.0);
        assert!((b - 4.0 * core::f64::consts::E).abs() < 1e-12);
        assert!((b - 10.873_127_313_836_1).abs() < 1e-9);
    }

    #[test]
    fn rejects_malformed_study() {
        let m = Model::figure1();
        let p = StudyParams::new(0.0, 0.0, 1.0, alloc::vec![16, 32, 64], 10, 1);
        assert!(convergence_study(&m, &TestFunction::tanh_y(), &p, &Sequential).is_err());
        let p = StudyParams::new(0.0, 0.0, 1.0, alloc::vec![16, 20, 24, 32], 10, 1);
        assert!(convergence_study(&m, &TestFunction::tanh_y(), &p, &Sequential).is_err());
        let p = StudyParams::new(0.0, 0.0, 1.0, alloc::vec![1, 2, 4, 8], 10, 1);
        assert!(convergence_study(&m, &TestFunction::x(), &p, &Sequential).is_err());
    }

    #[test]
    fn silent_layer_one_study_is_noise_dominated() {
        // f1 = 0 started at the origin: no spikes, y never leaves 0, both
        // processes are the same constant path.
        let mut spec = ModelSpec::figure1();
        spec.f1 = RateFunction::constant(0.0);
        let m = Model::new(spec).unwrap();
        let mut p = StudyParams::new(0.0, 0.0, 0.5, alloc::vec![1, 2, 4, 8], 20, 9);
        p.reps_limit = 80;
        p.dt = 1e-2;
        let rep = convergence_study(&m, &TestFunction::tanh_y(), &p, &Sequential).unwrap();
        assert!(rep.points.iter().all(|pt| pt.error == 0.0 && pt.noise_dominated));
        assert_eq!(rep.outcome, RateOutcome::Inconclusive { points_used: 0 });
    }
}
