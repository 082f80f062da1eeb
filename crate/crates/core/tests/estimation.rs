// SPDX-License-Identifier: Apache-2.0

use meanfield_core::estimation::{
    convergence_study, estimate_semigroup_finite, estimate_semigroup_limit, finite_second_moment_bound, moment_check,
    Query, RateOutcome, StudyParams,
};
use meanfield_core::model::{Model, ModelSpec, RateFunction};
use meanfield_core::{Runner, Sequential, TestFunction};

/// Evaluates replicas back to front; results must not change.
struct Reversed;

impl Runner for Reversed {
    fn map<T, F>(&self, reps: u64, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64) -> T + Sync + Send,
    {
        let mut out: Vec<(u64, T)> = (0..reps).rev().map(|r| (r, f(r))).collect();
        out.sort_by_key(|p| p.0);
        out.into_iter().map(|p| p.1).collect()
    }
}

#[test]
fn estimates_do_not_depend_on_evaluation_order() {
    let m = Model::figure1();
    let g = TestFunction::tanh_y();
    let q = Query { x0: 0.1, y0: 0.2, t: 0.5, reps: 300, seed: 77 };
    let a = estimate_semigroup_finite(&m, 40, &g, &q, &Sequential).unwrap();
    let b = estimate_semigroup_finite(&m, 40, &g, &q, &Reversed).unwrap();
    assert_eq!(a, b);
    let a = estimate_semigroup_limit(&m, &g, &q, 1e-3, &Sequential).unwrap();
    let b = estimate_semigroup_limit(&m, &g, &q, 1e-3, &Reversed).unwrap();
    assert_eq!(a, b);
}

#[test]
fn small_rate_study_is_reported_honestly() {
    let m = Model::figure1();
    let g = TestFunction::tanh_y();
    let p = StudyParams::new(0.0, 0.0, 1.0, vec![2, 4, 8, 16], 4000, 5);
    let report = convergence_study(&m, &g, &p, &Sequential).unwrap();
    assert_eq!(report.limit.reps, 16_000);
    assert_eq!(report.points.len(), 4);
    for pt in &report.points {
        assert_eq!(pt.error, (pt.finite.mean - report.limit.mean).abs());
        assert_eq!(pt.noise_dominated, pt.error <= 3.0 * pt.combined_stderr);
    }
    let usable = report.points.iter().filter(|pt| !pt.noise_dominated).count();
    match report.outcome {
        RateOutcome::Fitted { slope, ci_lo, ci_hi, points_used } => {
            assert_eq!(points_used, usable);
            assert!(usable >= 3);
            assert!(ci_lo <= slope && slope <= ci_hi);
        }
        RateOutcome::Inconclusive { points_used } => {
            assert_eq!(points_used, usable);
            assert!(usable < 3);
        }
    }
    let again = convergence_study(&m, &g, &p, &Sequential).unwrap();
    assert_eq!(report, again);
}

#[test]
fn unbounded_test_functions_are_refused() {
    let p = StudyParams::new(0.0, 0.0, 1.0, vec![2, 4, 8, 16], 10, 5);
    assert!(convergence_study(&Model::figure1(), &TestFunction::x(), &p, &Sequential).is_err());
}

#[test]
fn error_for_linear_g_shrinks_with_n() {
    let mut spec = ModelSpec::figure1();
    spec.f2 = RateFunction::constant(0.0);
    let m = Model::new(spec).unwrap();
    let g = TestFunction::x();
    let q = Query { x0: 1.5, y0: 0.0, t: 1.0, reps: 20_000, seed: 8 };
    let limit = estimate_semigroup_limit(&m, &g, &Query { reps: 40_000, ..q }, 1e-3, &Sequential).unwrap();
    let small = estimate_semigroup_finite(&m, 2, &g, &q, &Sequential).unwrap();
    let large = estimate_semigroup_finite(&m, 64, &g, &Query { seed: 9, ..q }, &Sequential).unwrap();
    let e_small = (small.mean - limit.mean).abs();
    let e_large = (large.mean - limit.mean).abs();
    assert!(e_large <= e_small + 3.0 * large.combined_stderr(&limit), "{e_large} vs {e_small}");
}

#[test]
fn finite_second_moment_respects_the_bound() {
    let m = Model::figure1();
    let bound = finite_second_moment_bound(&m, 0.0, 1.0);
    assert!((bound - 4.0 * std::f64::consts::E).abs() < 1e-12);
    for n in [10, 100] {
        let rep = moment_check(&m, n, 0.0, 1.0, 2000, n, &Sequential).unwrap();
        assert!(rep.passed, "N = {n}: {} vs {}", rep.estimate.mean, rep.bound);
        assert!(rep.estimate.mean < rep.bound);
    }

    let mut quiet = ModelSpec::figure1();
    quiet.f1 = RateFunction::constant(0.0);
    let quiet = Model::new(quiet).unwrap();
    let rep = moment_check(&quiet, 10, 2.0, 1.0, 1000, 1, &Sequential).unwrap();
    assert!((rep.estimate.mean - 4.0 * (-2.0f64).exp()).abs() < 1e-12);
    assert!(rep.passed);
}
