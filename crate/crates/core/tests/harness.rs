use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use statrs::distribution::{ContinuousCDF, Normal};

use frozen_er::harness::stats::ols_slope;
use frozen_er::harness::{
    format_g15, ks_statistic, read_rows, run_experiment, tail_cubic_fit, write_results,
    ExperimentResult, Row, Verdict,
};
use frozen_er::Error;

fn uniforms(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| 1.0 - rng.random::<f64>()).collect()
}

#[test]
fn ks_worked_examples() {
    assert_eq!(
        ks_statistic(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(),
        0.0
    );
    assert_eq!(ks_statistic(&[0.0, 1.0], &[2.0, 3.0]).unwrap(), 1.0);
    let d = ks_statistic(&[1.0, 2.0, 3.0, 4.0], &[2.5, 3.5]).unwrap();
    assert!((d - 0.5).abs() < 1e-15);
    assert!(matches!(ks_statistic(&[], &[1.0]), Err(Error::Config(_))));
}

#[test]
fn tail_fit_recovers_weibull_shapes() {
    // S(t) = exp(-t^k) gives slope k exactly.
    for (k, seed) in [(3.0, 1), (1.0, 2), (2.0, 3)] {
        let xs: Vec<f64> = uniforms(20_000, seed)
            .iter()
            .map(|u| (-u.ln()).powf(1.0 / k))
            .collect();
        let slope = tail_cubic_fit(&xs, (0.9, 0.995)).unwrap();
        assert!((slope - k).abs() < 0.3, "k = {k}: slope {slope}");
    }
}

#[test]
fn tail_fit_on_half_normal_matches_quantile_ols() {
    let normal = Normal::new(0.0, 1.0).unwrap();
    let xs: Vec<f64> = uniforms(20_000, 4)
        .iter()
        .map(|u| normal.inverse_cdf(1.0 - u / 2.0))
        .collect();
    let slope = tail_cubic_fit(&xs, (0.9, 0.995)).unwrap();
    // Same regression on exact quantiles of |N(0, 1)|.
    let exact: Vec<(f64, f64)> = (0..=950)
        .map(|i| {
            let q = 0.9 + 0.095 * i as f64 / 950.0;
            (
                normal.inverse_cdf((1.0 + q) / 2.0).ln(),
                (-(1.0 - q).ln()).ln(),
            )
        })
        .collect();
    let expected = ols_slope(&exact);
    assert!((expected - 1.547).abs() < 0.01, "{expected}");
    assert!(
        (slope - expected).abs() < 0.1,
        "slope {slope} vs {expected}"
    );
}

#[test]
fn tail_fit_rejects_bad_input() {
    let xs: Vec<f64> = uniforms(499, 5);
    assert!(matches!(
        tail_cubic_fit(&xs, (0.9, 0.99)),
        Err(Error::Statistics(_))
    ));
    let xs: Vec<f64> = uniforms(1000, 5);
    assert!(tail_cubic_fit(&xs, (0.4, 0.99)).is_err());
    assert!(tail_cubic_fit(&xs, (0.9, 0.9995)).is_err());
    assert!(tail_cubic_fit(&xs, (0.95, 0.9)).is_err());
}

fn small_result(rows: Vec<Row>) -> ExperimentResult {
    ExperimentResult {
        name: "demo".into(),
        seed: 7,
        config: json!({"a": 1, "b": [0.5, 2.0]}),
        rows,
        verdicts: vec![Verdict::new("always", true, "")],
    }
}

#[test]
fn empty_results_give_header_only_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("empty.csv");
    write_results(&small_result(vec![]), &out).unwrap();
    assert_eq!(
        std::fs::read_to_string(&out).unwrap(),
        "name,seed,replica,time,observable,value\n"
    );
    let meta: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("empty.csv.meta.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(meta["name"], "demo");
    assert_eq!(meta["seed"], 7);
    assert_eq!(meta["passed"], true);
    assert_eq!(meta["config"]["b"][1], 2.0);
    assert!(read_rows(&out).unwrap().is_empty());
}

#[test]
fn values_round_trip_at_fifteen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rt.csv");
    let values = [std::f64::consts::E, -1.0 / 7.0, 1.0e-300, 6.02e23, 0.0];
    let rows: Vec<Row> = values
        .iter()
        .enumerate()
        .map(|(i, &v)| Row::new(i as u64, 0.5 * i as f64, "v", v))
        .collect();
    write_results(&small_result(rows.clone()), &out).unwrap();
    let back = read_rows(&out).unwrap();
    assert_eq!(back.len(), rows.len());
    for (a, b) in rows.iter().zip(&back) {
        assert_eq!(format_g15(a.value), format_g15(b.value));
        assert!((a.value - b.value).abs() <= 1e-14 * a.value.abs());
        assert_eq!(
            (a.replica, a.time, &a.observable),
            (b.replica, b.time, &b.observable)
        );
    }
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("x.csv");
    match write_results(&small_result(vec![]), &out) {
        Err(Error::Io { path, .. }) => assert_eq!(path, out),
        other => panic!("{other:?}"),
    }
}

fn cheap_config() -> serde_json::Value {
    json!({"p": 0.5, "reps": 24, "times": [1.0, 2.0], "ratio": 10.0, "seed": 11})
}

#[test]
fn same_seed_gives_byte_identical_files() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    write_results(&run_experiment("theorem1", &cheap_config()).unwrap(), &a).unwrap();
    write_results(&run_experiment("theorem1", &cheap_config()).unwrap(), &b).unwrap();
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let meta = |p: &std::path::Path| std::fs::read(frozen_er::harness::io::meta_path(p)).unwrap();
    assert_eq!(meta(&a), meta(&b));
}

#[test]
fn thread_count_does_not_change_results() {
    let run_with = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment("theorem1", &cheap_config()).unwrap())
    };
    assert_eq!(run_with(1), run_with(3));
    let coalescent = json!({"reps": 2000, "freeze_reps": 200, "freeze_tol": 1.0});
    let run_c = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| run_experiment("coalescent-rates", &coalescent).unwrap())
    };
    assert_eq!(run_c(1), run_c(4));
}

#[test]
fn echoed_config_has_defaults_and_sorted_keys() {
    let r = run_experiment(
        "theorem1",
        &json!({"reps": 12, "times": [1.0, 2.0], "ratio": 10.0}),
    )
    .unwrap();
    let keys: Vec<&String> = r.config.as_object().unwrap().keys().collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(r.config["p"], 0.5);
    assert_eq!(r.config["reps"], 12);
    assert!(matches!(
        run_experiment("theorem1", &json!({"bogus": 1})),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        run_experiment("no-such-experiment", &json!(null)),
        Err(Error::Config(_))
    ));
}

#[test]
fn structural_verdicts_do_not_flip_with_more_replicas() {
    for seeds in [4, 12] {
        let r = run_experiment("coupling-p1", &json!({"n": 400, "seeds": seeds})).unwrap();
        assert!(r.passed(), "seeds = {seeds}: {:?}", r.verdicts);
    }
    for pairs in [20, 80] {
        let r = run_experiment("lemma-suite", &json!({"pairs": pairs})).unwrap();
        assert!(r.passed(), "pairs = {pairs}: {:?}", r.verdicts);
    }
}
