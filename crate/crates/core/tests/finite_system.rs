// SPDX-License-Identifier: Apache-2.0

use meanfield_core::estimation::{estimate_semigroup_finite, Query};
use meanfield_core::finite::{run_finite, simulate_finite, spike_count, uniform_grid, FiniteParams};
use meanfield_core::generators::{dynkin_check, DynkinParams, Generators};
use meanfield_core::model::{JumpLaw, Model, ModelSpec, RateFunction};
use meanfield_core::path::{Discard, Event};
use meanfield_core::rng::replica_rng;
use meanfield_core::stats::mean_stderr;
use meanfield_core::{Sequential, System, TestFunction};
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, DiscreteCDF, Poisson};

fn model(f1: RateFunction, f2: RateFunction) -> Model {
    let mut spec = ModelSpec::figure1();
    spec.f1 = f1;
    spec.f2 = f2;
    Model::new(spec).unwrap()
}

/// Chi-square goodness of fit against Poisson(mean); tail bins are merged
/// until each holds an expected count of at least 5.
fn poisson_gof_p_value(counts: &[u64], mean: f64) -> f64 {
    let law = Poisson::new(mean).unwrap();
    let n = counts.len() as f64;
    let max = *counts.iter().max().unwrap();
    let mut observed = vec![0u64; max as usize + 1];
    for &c in counts {
        observed[c as usize] += 1;
    }
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    let mut k = 0u64;
    loop {
        obs += observed.get(k as usize).copied().unwrap_or(0) as f64;
        exp += n * law.pmf(k);
        if exp >= 5.0 && n * law.sf(k) >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
        if n * law.sf(k) < 5.0 {
            // remaining mass goes into the last bin
            let rest: u64 = observed.iter().skip(k as usize + 1).sum();
            let last = bins.last_mut().unwrap();
            last.0 += obs + rest as f64;
            last.1 += exp + n * law.sf(k);
            break;
        }
        k += 1;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    1.0 - ChiSquared::new((bins.len() - 1) as f64).unwrap().cdf(stat)
}

#[test]
fn constant_rate_spike_counts_are_poisson() {
    let lambda = 2.0;
    let m = model(RateFunction::constant(lambda), ModelSpec::figure1().f2);
    let p = FiniteParams::new(50, 0.0, 0.0, 1.0);
    let counts: Vec<u64> = (0..4000).map(|r| spike_count(&m, &p, 17, r).unwrap()).collect();
    let p_value = poisson_gof_p_value(&counts, 50.0 * lambda);
    assert!(p_value > 1e-3, "p = {p_value}");
}

#[test]
fn gof_detects_a_wrong_rate() {
    let m = model(RateFunction::constant(2.2), RateFunction::constant(0.0));
    let p = FiniteParams::new(50, 0.0, 0.0, 1.0);
    let counts: Vec<u64> = (0..4000).map(|r| spike_count(&m, &p, 17, r).unwrap()).collect();
    assert!(poisson_gof_p_value(&counts, 100.0) < 1e-3);
}

#[test]
fn reset_gaps_are_exponential_for_constant_f2() {
    // With f2 ≡ μ the reset times form a Poisson process of rate μ.
    let mu = 3.0;
    let m = model(ModelSpec::figure1().f1, RateFunction::constant(mu));
    let p = FiniteParams::new(20, 0.0, 0.0, 200.0);
    let traj = simulate_finite(&m, &p, &[], 5).unwrap();
    let times: Vec<f64> = traj.records.iter().filter(|r| r.event == Event::Reset2).map(|r| r.t).collect();
    let gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let (mean, se) = mean_stderr(&gaps);
    assert!((mean - 1.0 / mu).abs() < 4.0 * se, "{mean} ± {se}");
    let long = gaps.iter().filter(|&&g| g > 1.0 / mu).count() as f64 / gaps.len() as f64;
    let expected = (-1.0f64).exp();
    let se_long = (expected * (1.0 - expected) / gaps.len() as f64).sqrt();
    assert!((long - expected).abs() < 4.0 * se_long);
}

#[test]
fn marks_follow_the_jump_law() {
    let m = model(RateFunction::constant(2.0), RateFunction::constant(0.0));
    let p = FiniteParams::new(200, 0.0, 0.0, 20.0);
    let traj = simulate_finite(&m, &p, &[], 3).unwrap();
    let marks: Vec<f64> = traj.records.iter().filter_map(|r| r.event.mark()).collect();
    assert!(marks.len() > 5000);
    let (mean, se) = mean_stderr(&marks);
    assert!(mean.abs() < 4.0 * se);
    let sq: Vec<f64> = marks.iter().map(|u| u * u).collect();
    let (m2, se2) = mean_stderr(&sq);
    assert!((m2 - 1.0).abs() < 4.0 * se2);
}

#[test]
fn no_layer_one_activity_is_a_deterministic_flow() {
    let m = model(RateFunction::constant(0.0), RateFunction::constant(0.0));
    let q = Query { x0: 1.0, y0: 0.0, t: 1.0, reps: 16, seed: 2 };
    let est = estimate_semigroup_finite(&m, 7, &TestFunction::x(), &q, &Sequential).unwrap();
    assert_eq!(est.mean, (-1.0f64).exp());
    assert_eq!(est.stderr, 0.0);
    let one = estimate_semigroup_finite(&Model::figure1(), 7, &TestFunction::one(), &q, &Sequential).unwrap();
    assert_eq!((one.mean, one.stderr), (1.0, 0.0));
}

#[test]
fn short_time_expansion_of_y_squared() {
    // E[Y_t²] ≈ g(z) + t A^N g(z) for small t.
    let lambda = 2.0;
    let m = model(RateFunction::constant(lambda), RateFunction::constant(0.0));
    let g = TestFunction::y_squared();
    let (n, t) = (10, 0.01);
    let q = Query { x0: 0.5, y0: 0.0, t, reps: 200_000, seed: 9 };
    let est = estimate_semigroup_finite(&m, n, &g, &q, &Sequential).unwrap();
    let first_order = g.value(0.5, 0.0) + t * Generators::new(&m).apply_an(n, &g, 0.5, 0.0);
    assert!((first_order - lambda * t).abs() < 1e-12);
    // (A^N)² y² = -2α2 λσ² at y = 0, so the t² term is -α2 λ σ² t².
    let second_order = first_order - lambda * t * t;
    let slack = 3.0 * est.stderr + 1e-5;
    assert!((est.mean - second_order).abs() < slack, "{} vs {second_order} (se {})", est.mean, est.stderr);
}

#[test]
fn dynkin_formula_holds_for_the_finite_generator() {
    let m = Model::figure1();
    for g in [TestFunction::tanh_y(), TestFunction::mixed()] {
        let p = DynkinParams { x0: 0.2, y0: 0.4, t: 1.0, reps: 4000, intervals: 400, seed: 3 };
        let rep = dynkin_check(&m, System::Finite { n: 30 }, &g, &p, &Sequential).unwrap();
        assert!(
            rep.discrepancy() < 4.0 * rep.paired_stderr + 2e-3,
            "{}: {} vs {} (paired se {})",
            g.name(),
            rep.lhs,
            rep.rhs,
            rep.paired_stderr
        );
    }
}

#[test]
fn alternative_jump_laws_run() {
    for nu in [JumpLaw::rademacher(1.0), JumpLaw::centered_uniform(3f64.sqrt())] {
        let mut spec = ModelSpec::figure1();
        spec.nu = nu;
        let m = Model::new(spec).unwrap();
        let p = FiniteParams::new(100, 0.0, 0.0, 5.0);
        let traj = simulate_finite(&m, &p, &uniform_grid(5.0, 50), 4).unwrap();
        for r in &traj.records {
            if let Some(u) = r.event.mark() {
                match nu.kind() {
                    meanfield_core::JumpKind::Rademacher => assert_eq!(u.abs(), 1.0),
                    _ => assert!(u.abs() <= 3f64.sqrt()),
                }
            }
        }
        let mut rng = replica_rng(1, 0);
        assert!(run_finite(&m, &p, &[], &mut rng, &mut Discard).is_ok());
    }
}
