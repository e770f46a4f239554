use frontier_gof::decision::{normal_quantile, phi1, phi2};
use frontier_gof::frontier::Sample;
use frontier_gof::statistic::{
    breakdown_from_inputs, c_x, design_sums, t1, t_f_from_inputs, t_statistic, Affine, OddInputs,
};
use frontier_gof::sims::{build_sample, replicate_draws, ExperimentSpec, GammaMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Residual sum of squares of the least-squares line, from the 2x2 normal equations.
fn rss_oracle(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let (sx, sy) = (xs.iter().sum::<f64>(), ys.iter().sum::<f64>());
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let det = m * sxx - sx * sx;
    let slope = (m * sxy - sx * sy) / det;
    let icept = (sxx * sy - sx * sxy) / det;
    xs.iter()
        .zip(ys)
        .map(|(x, y)| (y - icept - slope * x).powi(2))
        .sum()
}

fn random_inputs(rng: &mut ChaCha8Rng) -> OddInputs<f64> {
    let m = rng.random_range(3..60usize);
    let mut xs: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    xs.sort_by(f64::total_cmp);
    let ghat: Vec<f64> = xs.iter().map(|_| rng.random_range(-2.0..1.0)).collect();
    let ys: Vec<f64> = ghat.iter().map(|g| g - rng.random::<f64>() + 0.1).collect();
    OddInputs { xs, ys, ghat }
}

#[test]
fn t1_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let inp = random_inputs(&mut rng);
        let f = Affine::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let got = t1(&inp.ghat, &inp.xs, f).unwrap();
        let want = rss_oracle(&inp.xs, &inp.ghat);
        let scale: f64 = inp.ghat.iter().map(|g| g * g).sum::<f64>() + 1.0;
        assert!((got - want).abs() <= 1e-10 * scale.max(want.abs()), "{got} vs {want}");
    }
}

#[test]
fn t1_independent_of_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inp = random_inputs(&mut rng);
    let base = t1(&inp.ghat, &inp.xs, Affine::zero()).unwrap();
    for _ in 0..20 {
        let f = Affine::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let v = t1(&inp.ghat, &inp.xs, f).unwrap();
        assert!((v - base).abs() <= 1e-10 * base.abs().max(1e-12) * 10.0, "{v} vs {base}");
    }
}

#[test]
fn t_equals_t_f() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let inp = random_inputs(&mut rng);
        let gamma = rng.random_range(0.3..3.0);
        let base = breakdown_from_inputs(&inp, gamma).unwrap().t;
        let scale = inp.ghat.iter().map(|g| g * g).sum::<f64>().max(1.0);
        for _ in 0..100 {
            let f = Affine::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let v = t_f_from_inputs(&inp, gamma, f).unwrap();
            assert!((v - base).abs() <= 1e-8 * scale, "{v} vs {base}");
        }
    }
}

#[test]
fn decomposition_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let inp = random_inputs(&mut rng);
        let b = breakdown_from_inputs(&inp, rng.random_range(0.3..3.0)).unwrap();
        let scale = b.s1.abs().max(1.0);
        assert!((b.s1 - b.s2 - b.s3 - b.t).abs() <= 1e-9 * scale, "{b:?}");
        assert!(b.s2 >= 0.0 && b.s3 >= 0.0);
    }
}

#[test]
fn equidistant_closed_forms() {
    for n in [4usize, 10, 100] {
        let odd: Vec<f64> = (1..=n / 2).map(|i| (2 * i - 1) as f64 / n as f64).collect();
        let d = design_sums(&odd).unwrap();
        let nf = n as f64;
        assert_eq!(d.r, (nf * nf - 1.0) / (6.0 * nf), "n={n}");
        assert_eq!(d.s, nf / 4.0, "n={n}");
    }
}

#[test]
fn affine_shift_invariance_per_replicate() {
    let mut spec = ExperimentSpec::new(100, 1, 5);
    spec.gamma_mode = GammaMode::Known { gamma: 1.0 };
    for index in 0..50 {
        let (xs, errs) = replicate_draws(&spec, index).unwrap();
        let base = build_sample(&xs, &errs, |_| 0.0).unwrap();
        let shifted = build_sample(&xs, &errs, |x| 0.7 - 2.3 * x).unwrap();
        let a = t_statistic(&base, 0.2, 1.0).unwrap().t;
        let b = t_statistic(&shifted, 0.2, 1.0).unwrap().t;
        assert!((a - b).abs() <= 1e-9, "{a} vs {b}");
    }
}

#[test]
fn affine_data_null() {
    // dyadic design and coefficients keep every interpolation exact
    let (a, b) = (0.25, -1.5);
    let pts: Vec<(f64, f64)> = (0..=96)
        .map(|j| {
            let x = -0.25 + j as f64 / 64.0;
            (x, a + b * x)
        })
        .collect();
    let sample = Sample::new(pts).unwrap();
    let inp = OddInputs::from_sample(&sample, 0.2).unwrap();
    for (g, x) in inp.ghat.iter().zip(&inp.xs) {
        assert!((g - (a + b * x)).abs() < 1e-12);
    }
    let bd = t_statistic(&sample, 0.2, 1.5).unwrap();
    assert_eq!(bd.correction_count, inp.xs.len());
    let tf = t_f_from_inputs(&inp, 1.5, Affine::new(b, a)).unwrap();
    assert!((bd.t - tf).abs() <= 1e-9 * (1.0 + tf.abs()), "{} vs {tf}", bd.t);
}

#[test]
fn c_x_ignores_far_points() {
    let xs: Vec<f64> = (0..=140).map(|j| (j as f64 - 20.0) / 100.0).collect();
    let base = c_x(&xs, 0.2, 101).unwrap();
    let mut more = xs.clone();
    more.extend([-5.0, -3.0, 4.0, 9.0]);
    assert_eq!(c_x(&more, 0.2, 101).unwrap(), base);
}

#[test]
fn decisions_monotone_and_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..2000 {
        let n = rng.random_range(20.0..400.0f64).round();
        let h = rng.random_range(0.05..0.4);
        let g = rng.random_range(0.2..3.0);
        let level = rng.random_range(0.001..0.2);
        let t = rng.random_range(-1.0..5.0);
        for d in [
            phi1(t, n, h, g, 0.5, level).unwrap(),
            phi2(t, n, h, g, 13.7, level).unwrap(),
        ] {
            // p <= level exactly when T >= crit, up to quantile accuracy
            if (d.p - level).abs() > 1e-10 {
                assert_eq!(d.p <= level, d.reject, "{d:?} level={level}");
            }
        }
        let lo = phi2(t, n, h, g, 13.7, level).unwrap();
        let hi = phi2(t + 0.1, n, h, g, 13.7, level).unwrap();
        assert!(hi.p <= lo.p);
        if lo.p > 1e-300 && lo.p < 1.0 - 1e-9 && 0.1 / (lo.crit / normal_quantile(1.0 - level).unwrap()) > 1e-6 {
            assert!(hi.p < lo.p);
        }
        if phi2(t, n, h, g, 13.7, level * 0.5).unwrap().reject {
            assert!(lo.reject);
        }
        let c = rng.random_range(0.5..2.0);
        for (a, b) in [
            (phi1(t, n, h, g, 0.5, level).unwrap(), phi1(t, n, h, g * c, 0.5, level).unwrap()),
            (phi2(t, n, h, g, 13.7, level).unwrap(), phi2(t, n, h, g * c, 13.7, level).unwrap()),
        ] {
            assert!((b.crit - a.crit / (c * c)).abs() <= 1e-12 * a.crit);
        }
    }
    assert!((normal_quantile(0.99).unwrap() - 2.3263478740408408).abs() < 1e-12);
}
