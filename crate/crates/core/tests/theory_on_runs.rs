//! Theory estimators applied to actual optimizer runs, and ordering
//! properties of the sphere success probability.

use nalgebra::DVector;
use onefifth_core::objectives::{make_sphere, unit_ball_root};
use onefifth_core::sampling::RngStream;
use onefifth_core::strategies::{run, RunConfig, Strategy, StrategyParams};
use onefifth_core::theory::{almost_sure_rate, empirical_drift, sphere_success_probability};
use onefifth_core::trace::Trace;

fn start(d: usize) -> DVector<f64> {
    DVector::from_element(d, 1.0 / (d as f64).sqrt())
}

#[test]
fn sphere_success_probability_is_strictly_decreasing() {
    let d = 10;
    let vd = unit_ball_root(d);
    let sigma_bar = 1.0 / (d as f64 * vd);
    let mut rng = RngStream::new(40, 0);
    let p1 = sphere_success_probability(sigma_bar, 0.0, d, 100_000, &mut rng);
    let p2 = sphere_success_probability(2.0 * sigma_bar, 0.0, d, 100_000, &mut rng);
    let gap = p1.probability - p2.probability;
    let combined = (p1.std_error * p1.std_error + p2.std_error * p2.std_error).sqrt();
    assert!(
        gap > 3.0 * combined,
        "expected a clear decrease: p({sigma_bar:.4}) = {:.4}, p({:.4}) = {:.4}",
        p1.probability,
        2.0 * sigma_bar,
        p2.probability
    );
}

fn sphere_traces(sigma0: f64, n_runs: u64, iters: u64, seed: u64) -> Vec<Trace> {
    let d = 10;
    let obj = make_sphere(d);
    let strategy = Strategy::Es(StrategyParams::smooth());
    (0..n_runs)
        .map(|i| {
            let mut rng = RngStream::new(seed, i);
            run(
                &strategy,
                &obj,
                start(d),
                sigma0,
                &RunConfig::iterations(iters),
                &mut rng,
            )
            .unwrap()
        })
        .collect()
}

#[test]
fn log_suboptimality_drifts_down_across_runs() {
    let traces = sphere_traces(1.0, 20, 2_000, 41);
    let drift = empirical_drift(&traces, |row| row.f_mu.ln()).unwrap();
    assert!(
        drift.mean < 0.0 && drift.ci99.1 < 0.0,
        "mean {} ci99 ({}, {})",
        drift.mean,
        drift.ci99.0,
        drift.ci99.1
    );
}

#[test]
fn convergence_rate_is_negative_and_initialization_free() {
    // The post-burn-in slope of log f_mu is negative and agrees within a
    // factor of two across wildly different initial step sizes.
    let mut slopes = Vec::new();
    for (i, sigma0) in [1e-4, 1.0, 1e4].into_iter().enumerate() {
        let trace = &sphere_traces(sigma0, 1, 10_000, 42 + i as u64)[0];
        let slope = almost_sure_rate(trace, 2_000).unwrap();
        assert!(slope < 0.0, "sigma0 {sigma0}: slope {slope}");
        slopes.push(slope);
    }
    let max = slopes.iter().cloned().fold(f64::MIN, f64::max);
    let min = slopes.iter().cloned().fold(f64::MAX, f64::min);
    assert!(
        min / max <= 2.0,
        "slopes vary more than 2x across initializations: {slopes:?}"
    );
}
