use frontier_gof::decision::{run_test, GofConfig};
use frontier_gof::poisson_mc::{estimate_a1, A1Config};
use frontier_gof::report::{A1Summary, ExperimentSummary, Payload, Report, TestSummary};
use frontier_gof::series::{parse_series, rescale_labels, series_to_sample};
use frontier_gof::sims::{run_experiment, ExperimentSpec};
use proptest::prelude::*;

fn rows() -> impl Strategy<Value = Vec<(f64, f64)>> {
    proptest::collection::vec((0.01f64..10.0, -100.0f64..100.0), 4..60).prop_map(|steps| {
        let mut label = 1800.0;
        steps
            .into_iter()
            .map(|(d, v)| {
                label += d;
                (label, v)
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn written_rows_parse_back(rows in rows(), delim in prop::sample::select(vec![',', ';', '\t']), header in any::<bool>()) {
        let mut text = String::new();
        if header {
            text.push_str(&format!("year{delim}value\n"));
        }
        for (l, v) in &rows {
            text.push_str(&format!("{l}{delim}{v}\n"));
        }
        let s = parse_series(&text).unwrap();
        prop_assert_eq!(&s.rows, &rows);
        prop_assert_eq!(s.delimiter, delim);
        prop_assert_eq!(s.had_header, header);
    }

    #[test]
    fn rescaling_is_affine_onto_the_buffered_interval(rows in rows(), h in 0.01f64..0.5) {
        let x = rescale_labels(&rows, h);
        prop_assert!((x[0].0 + h).abs() < 1e-12);
        prop_assert_eq!(x[x.len() - 1].0, 1.0 + h);
        let (l0, ln) = (rows[0].0, rows[rows.len() - 1].0);
        for (&(l, v), &(xi, w)) in rows.iter().zip(&x) {
            prop_assert_eq!(v, w);
            let want = -h + (l - l0) / (ln - l0) * (1.0 + 2.0 * h);
            prop_assert!((xi - want).abs() < 1e-12);
        }
        for w in x.windows(2) {
            prop_assert!(w[1].0 > w[0].0);
        }
    }
}

#[test]
fn parity_is_assigned_after_missing_rows() {
    let text = "year,value\n1,-1\n2,NA\n3,-2\n4,-3\n5,\n6,-4\n7,-5\n8,-6\n";
    let s = parse_series(text).unwrap();
    assert_eq!(s.skipped_count, 2);
    assert_eq!(s.parsed_count, 6);
    let sample = series_to_sample(&s, 0.2).unwrap();
    let evens: Vec<f64> = sample.even_points().iter().map(|p| p.1).collect();
    assert_eq!(evens, vec![-2.0, -4.0, -6.0]);
}

#[test]
fn reports_round_trip() {
    let spec = ExperimentSpec::new(100, 1, 4);
    let (xs, errs) = frontier_gof::sims::replicate_draws(&spec, 0).unwrap();
    let sample = frontier_gof::sims::build_sample(&xs, &errs, |_| 0.0).unwrap();
    let config = GofConfig::default();
    let outcome = run_test(&sample, &config).unwrap();
    let a1 = A1Config::new(50, 1.0, 2);
    let estimate = estimate_a1(&a1).unwrap();
    let mut small = ExperimentSpec::new(30, 20, 8);
    small.k = 5;
    let payloads = [
        Payload::Test(TestSummary::new("x.csv".into(), 100, 0, &config, &outcome)),
        Payload::CalibrateA1(A1Summary::new(&a1, &estimate)),
        Payload::Experiment(ExperimentSummary {
            results: vec![run_experiment(&small).unwrap()],
        }),
    ];
    for payload in payloads {
        let mut r = Report::new(vec!["frontier-gof".into(), "x".into()], payload);
        r.warnings.push("a warning".into());
        r.wall_time_secs = 0.25;
        let json = r.to_json();
        let back = Report::from_json(&json).unwrap();
        assert_eq!(back.to_json(), json);
        assert_eq!(back.schema_version, r.schema_version);
        assert!(r.to_table().contains("warning: a warning"));
    }
}
