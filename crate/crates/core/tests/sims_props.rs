use frontier_gof::frontier::residuals_even;
use frontier_gof::poisson_mc::with_workers;
use frontier_gof::sims::{
    build_sample, replicate_draws, run_experiment, ErrorLaw, ExperimentSpec, GammaMode, Truth,
};
use frontier_gof::tail::neg_hill;

#[test]
fn residuals_track_the_errors() {
    let spec = ExperimentSpec::new(1000, 1, 31);
    let (xs, errs) = replicate_draws(&spec, 0).unwrap();
    let sample = build_sample(&xs, &errs, |_| 0.0).unwrap();
    let r = residuals_even(&sample, 0.2).unwrap();
    let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(max, 0.0);
    // the frontier sits at most a few spacings below zero, so the mean residual is about
    // the error mean -1/2 (sd of the mean about 0.013 over ~500 points)
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    assert!(mean > -0.55 && mean < -0.44, "{mean}");
}

/// On the raw errors the estimator has mean close to k/(k-1). The fitted frontier lies below the
/// true affine frontier, so residuals dominate the errors and the estimate from residuals is larger
/// (about 1.3 at k = 20, for any n).
#[test]
fn scale_estimate_from_errors_and_residuals() {
    let spec = ExperimentSpec::new(1000, 500, 17);
    let (mut from_errors, mut from_residuals) = (0.0, 0.0);
    for i in 0..500 {
        let (xs, errs) = replicate_draws(&spec, i).unwrap();
        let sample = build_sample(&xs, &errs, |_| 0.0).unwrap();
        let r = residuals_even(&sample, 0.2).unwrap();
        let e: Vec<f64> = sample.even_eligible().iter().map(|p| p.1).collect();
        assert_eq!(r.len(), e.len());
        assert!(r.iter().zip(&e).all(|(r, e)| r >= e));
        from_residuals += neg_hill(&r, 20).unwrap().gamma_hat;
        from_errors += neg_hill(&e, 20).unwrap().gamma_hat;
    }
    let (from_errors, from_residuals) = (from_errors / 500.0, from_residuals / 500.0);
    assert!(from_errors > 0.85 && from_errors < 1.25, "{from_errors}");
    assert!((from_errors - 20.0 / 19.0).abs() < 0.05, "{from_errors}");
    assert!(from_residuals > from_errors, "{from_residuals} vs {from_errors}");
}

#[test]
fn experiments_are_worker_count_independent() {
    let mut spec = ExperimentSpec::new(50, 120, 9);
    spec.k = 10;
    spec.truth = Truth::Sin { c: 0.3, alpha: 2.0 };
    let a = with_workers(Some(1), || run_experiment(&spec)).unwrap();
    let b = with_workers(Some(4), || run_experiment(&spec)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.decisions, b.decisions);
    assert_eq!(a.mean_t.to_bits(), b.mean_t.to_bits());
}

#[test]
fn affine_truth_gives_identical_decisions() {
    let mut spec = ExperimentSpec::new(100, 100, 12);
    spec.gamma_mode = GammaMode::Known { gamma: 1.0 };
    let base = run_experiment(&spec).unwrap();
    spec.truth = Truth::Power { c: -0.8, p: 1, x0: 0.3 };
    let shifted = run_experiment(&spec).unwrap();
    assert_eq!(base.decisions, shifted.decisions);
    assert!((base.mean_t - shifted.mean_t).abs() < 1e-9);
}

#[test]
fn report_counts_are_consistent() {
    let mut spec = ExperimentSpec::new(20, 50, 3);
    spec.k = 5;
    spec.errors = ErrorLaw::NegExponential;
    let r = run_experiment(&spec).unwrap();
    assert_eq!(r.reps_done + r.reps_failed, 50);
    assert_eq!(r.decisions.len(), 50);
    for p in [r.rejection_rate_phi1, r.rejection_rate_phi2] {
        assert!((0.0..=1.0).contains(&p));
    }
    let json = serde_json::to_string(&r).unwrap();
    let back: frontier_gof::ExperimentReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back.spec, r.spec);
    assert_eq!(back.rejection_rate_phi2, r.rejection_rate_phi2);
}
