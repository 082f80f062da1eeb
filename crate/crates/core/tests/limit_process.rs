// SPDX-License-Identifier: Apache-2.0

use meanfield_core::estimation::{estimate_semigroup_limit, girsanov_estimate, limit_moment_check, Query};
use meanfield_core::generators::{dynkin_check, DynkinParams};
use meanfield_core::limit::{
    auxiliary_terminal_with, first_variation_with, limit_terminal_with, simulate_auxiliary, simulate_limit, LimitParams,
};
use meanfield_core::model::{Model, ModelSpec, RateFunction};
use meanfield_core::rng::replica_rng;
use meanfield_core::stats::mean_stderr;
use meanfield_core::{Event, Sequential, System, TestFunction};

fn model(f1: RateFunction, f2: RateFunction) -> Model {
    let mut spec = ModelSpec::figure1();
    spec.f1 = f1;
    spec.f2 = f2;
    Model::new(spec).unwrap()
}

#[test]
fn constant_rate_is_an_ornstein_uhlenbeck_process() {
    // dX = -(α1 + λ) X dt + σ√λ dW
    let lambda = 1.5;
    let m = model(RateFunction::constant(lambda), RateFunction::constant(0.0));
    let (x0, t, dt) = (0.8, 1.0, 1e-3);
    let k = 1.0 + lambda;
    let mean = x0 * (-k * t).exp();
    let var = lambda * (1.0 - (-2.0 * k * t).exp()) / (2.0 * k);

    let p = LimitParams::new(x0, 0.0, t, dt);
    let xs: Vec<f64> = (0..20_000).map(|r| limit_terminal_with(&m, &p, &mut replica_rng(4, r)).unwrap().0).collect();
    let (m1, se1) = mean_stderr(&xs);
    assert!((m1 - mean).abs() < 5.0 * se1, "mean {m1} vs {mean}");

    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let (v, se_v) = mean_stderr(&dev);
    assert!((v - var).abs() < 5.0 * se_v, "var {v} vs {var}");
}

#[test]
fn without_rates_the_flow_is_deterministic() {
    let m = model(RateFunction::constant(0.0), RateFunction::constant(0.0));
    let q = Query { x0: 0.0, y0: 2.0, t: 1.0, reps: 8, seed: 1 };
    let est = estimate_semigroup_limit(&m, &TestFunction::y(), &q, 1e-4, &Sequential).unwrap();
    // Euler for y' = -y: (1 - dt)^(1/dt)
    assert!((est.mean - 2.0 * (-1.0f64).exp()).abs() < 2e-4);
    assert_eq!(est.stderr, 0.0);
}

#[test]
fn resets_arrive_at_the_declared_rate() {
    let mu = 2.5;
    let m = model(ModelSpec::figure1().f1, RateFunction::constant(mu));
    let p = LimitParams::new(0.0, 0.0, 400.0, 1e-2);
    let traj = simulate_limit(&m, &p, &[], 8).unwrap();
    let resets = traj.count("reset2") as f64;
    assert!((resets - mu * 400.0).abs() < 4.0 * (mu * 400.0f64).sqrt());
    assert!(traj.records.iter().filter(|r| r.event == Event::Reset2).all(|r| r.y == 0.0));
}

#[test]
fn unit_function_has_unit_weighted_mean() {
    let m = Model::figure1();
    let p = LimitParams::new(0.0, 0.5, 1.0, 1e-3);
    let w: Vec<f64> =
        (0..20_000).map(|r| auxiliary_terminal_with(&m, &p, &mut replica_rng(12, r)).unwrap().2.exp()).collect();
    let (mean, se) = mean_stderr(&w);
    assert!((mean - 1.0).abs() < 4.0 * se, "{mean} ± {se}");
}

#[test]
fn reweighted_auxiliary_matches_direct_simulation() {
    let m = Model::figure1();
    for g in [TestFunction::tanh_y(), TestFunction::bump()] {
        let q = Query { x0: 0.3, y0: 0.5, t: 1.0, reps: 20_000, seed: 21 };
        let direct = estimate_semigroup_limit(&m, &g, &q, 1e-3, &Sequential).unwrap();
        let q2 = Query { seed: 22, ..q };
        let weighted = girsanov_estimate(&m, &g, &q2, 1e-3, &Sequential).unwrap();
        let se = direct.combined_stderr(&weighted);
        assert!(
            (direct.mean - weighted.mean).abs() < 3.5 * se,
            "{}: {} vs {} (se {se})",
            g.name(),
            direct.mean,
            weighted.mean
        );
    }
}

#[test]
fn constant_f2_needs_no_reweighting() {
    let m = model(ModelSpec::figure1().f1, RateFunction::constant(2.0));
    let p = LimitParams::new(0.0, 0.0, 3.0, 1e-3);
    for seed in 0..20 {
        let path = simulate_auxiliary(&m, &p, &[1.0, 2.0, 3.0], seed).unwrap();
        assert_eq!(path.log_weight, 0.0);
        assert!(path.records.iter().all(|r| r.log_weight == 0.0));
    }
}

#[test]
fn auxiliary_path_log_weight_is_cumulative() {
    let m = Model::figure1();
    let p = LimitParams::new(0.0, 0.0, 2.0, 1e-3);
    let path = simulate_auxiliary(&m, &p, &[0.5, 1.0, 1.5, 2.0], 3).unwrap();
    // the reweighting integrand f2 - sup is non-positive, jumps add ln(f2/sup) <= 0
    let last = path.records.iter().rfind(|r| r.record.event == Event::Grid).unwrap();
    assert_eq!(last.log_weight, path.log_weight);
    assert_eq!(path.jump_times.len(), path.records.iter().filter(|r| r.record.event == Event::Reset2).count());
}

#[test]
fn constant_rate_first_variation() {
    let lambda = 2.0;
    let m = model(RateFunction::constant(lambda), RateFunction::constant(1.0));
    let (t, dt) = (1.0, 1e-5);
    let p = LimitParams::new(0.2, 0.0, t, dt);
    let (_, out) = first_variation_with(&m, &p, &[], &mut replica_rng(1, 0)).unwrap();
    let exact = (-(1.0 + lambda) * t).exp();
    assert!((out.variation.dx_dx - exact).abs() < 1e-3 * exact);
}

#[test]
fn first_variation_matches_common_random_number_differences() {
    let m = Model::figure1();
    let (t, dt, h) = (1.0, 1e-3, 1e-6);
    for r in 0..20 {
        let (x0, y0) = (0.1 * r as f64 - 1.0, 0.5);
        let p = LimitParams::new(x0, y0, t, dt);
        let (_, base) = first_variation_with(&m, &p, &[], &mut replica_rng(30, r)).unwrap();
        let run = |x: f64| {
            let q = LimitParams::new(x, y0, t, dt);
            first_variation_with(&m, &q, &[], &mut replica_rng(30, r)).unwrap().1.state
        };
        let (plus, minus) = (run(x0 + h), run(x0 - h));
        let fd_x = (plus.xbar - minus.xbar) / (2.0 * h);
        let fd_y = (plus.ybar - minus.ybar) / (2.0 * h);
        let v = base.variation;
        assert!((fd_x - v.dx_dx).abs() <= 1e-5 * (1.0 + v.dx_dx.abs()), "{fd_x} vs {}", v.dx_dx);
        assert!((fd_y - v.dy_dx).abs() <= 1e-5 * (1.0 + v.dy_dx.abs()), "{fd_y} vs {}", v.dy_dx);
    }
}

#[test]
fn dynkin_formula_holds_for_the_limit_generator() {
    let m = Model::figure1();
    for g in [TestFunction::tanh_y(), TestFunction::tanh_xy()] {
        let p = DynkinParams { x0: 0.0, y0: 0.5, t: 1.0, reps: 4000, intervals: 200, seed: 6 };
        let rep = dynkin_check(&m, System::Limit { dt: 1e-3 }, &g, &p, &Sequential).unwrap();
        assert!(
            rep.discrepancy() < 4.0 * rep.paired_stderr + 3e-3,
            "{}: {} vs {} (paired se {})",
            g.name(),
            rep.lhs,
            rep.rhs,
            rep.paired_stderr
        );
    }
}

#[test]
fn limit_moments_stay_finite() {
    let m = Model::figure1();
    let times: Vec<f64> = (1..=10).map(|k| 0.5 * k as f64).collect();
    let rep = limit_moment_check(&m, 0.0, 0.0, &times, 2000, 1e-3, 5, &Sequential).unwrap();
    assert!(rep.finite);
    assert_eq!(rep.rows.len(), 10);
    assert!(rep.rows.iter().all(|r| r.x2.is_finite() && r.y2.is_finite()));

    let quiet = model(RateFunction::constant(0.0), RateFunction::constant(0.0));
    let rep = limit_moment_check(&quiet, 1.0, 1.0, &times, 4, 1e-3, 5, &Sequential).unwrap();
    assert!(rep.rows.windows(2).all(|w| w[1].x2 < w[0].x2 && w[1].y2 < w[0].y2));
}
