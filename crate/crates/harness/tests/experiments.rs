use pcc_core::methods::detect;
use pcc_core::{align_and_score, Method, MethodOptions};
use pcc_harness::experiment::write_summary;
use pcc_harness::{builtin_spec, run_experiment, ExperimentId, ExperimentSpec};

fn small_spec() -> ExperimentSpec {
    let mut spec = builtin_spec(ExperimentId::E1a).unwrap();
    spec.grid = vec![100.0, 200.0];
    spec.reps = 6;
    spec.methods = vec![Method::Pcc, Method::Npcc, Method::Score];
    spec.timing = false;
    spec.seed = 11;
    spec
}

fn csv_of(spec: &ExperimentSpec) -> Vec<u8> {
    let out = run_experiment(spec).unwrap();
    let mut buf = Vec::new();
    write_summary(&out.summary, &mut buf).unwrap();
    buf
}

#[test]
fn replay_is_byte_identical() {
    let spec = small_spec();
    assert_eq!(csv_of(&spec), csv_of(&spec));
}

#[test]
fn thread_count_does_not_change_results() {
    let spec = small_spec();
    let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| csv_of(&spec));
    let parallel = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| csv_of(&spec));
    assert_eq!(serial, parallel);
}

#[test]
fn summary_layout_and_ranges() {
    let mut spec = small_spec();
    spec.timing = true;
    let out = run_experiment(&spec).unwrap();
    let mut buf = Vec::new();
    write_summary(&out.summary, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "experiment,grid_param,value,method,mean_error,std_error,mean_seconds,failures,reps"
    );
    // grid-major, method-minor
    let order: Vec<(f64, &str)> = out.summary.iter().map(|r| (r.value, r.method.as_str())).collect();
    assert_eq!(
        order,
        vec![(100.0, "pcc"), (100.0, "npcc"), (100.0, "score"), (200.0, "pcc"), (200.0, "npcc"), (200.0, "score")]
    );
    for r in &out.summary {
        assert!((0.0..=1.0).contains(&r.mean_error));
        assert!(r.mean_seconds > 0.0);
        assert_eq!(r.reps, 6);
        assert_eq!(r.failures, 0);
    }
    assert_eq!(out.raw.len(), 2 * 6 * 3);
    // rep-minor within a method
    assert_eq!(out.raw[0].rep, 0);
    assert_eq!(out.raw[1].rep, 1);
    assert_eq!(out.raw[1].method, "pcc");
}

#[test]
fn failed_reps_are_counted_not_averaged() {
    let mut spec = small_spec();
    spec.grid = vec![100.0];
    // more eigenvectors than nodes: every rep fails
    spec.methods = vec![Method::PccStar, Method::Pcc];
    spec.options.mk = Some(1000);
    let out = run_experiment(&spec).unwrap();
    assert_eq!(out.summary[0].failures, 6);
    assert!(out.summary[0].mean_error.is_nan());
    assert_eq!(out.summary[1].failures, 0);
    assert!(out.raw[0].failure.as_ref().unwrap().contains("eigenvectors"));
}

#[test]
fn spec_json_round_trip() {
    let spec = builtin_spec(ExperimentId::E2c).unwrap();
    let json = serde_json::to_string(&spec).unwrap();
    assert!(json.contains("\"id\":\"2c\""));
    let back: ExperimentSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, spec);
    let minimal: ExperimentSpec = serde_json::from_str(
        r#"{"id": "custom", "grid_param": "n", "grid": [60],
            "model": {"n": 0, "K": 2, "P": [0.8, 0.1, 0.1, 0.8],
                      "theta": {"kind": "constant", "args": {"value": 0.9}},
                      "labels": {"kind": "proportions", "args": {"fractions": [1, 1]}}}}"#,
    )
    .unwrap();
    assert_eq!(minimal.reps, 100);
    assert!(minimal.timing);
    let mut quick = minimal.clone();
    quick.reps = 3;
    let out = run_experiment(&quick).unwrap();
    assert_eq!(out.summary.len(), 4);
}

#[test]
fn extra_eigenvector_changes_little() {
    // three-community SBM: M_k = K+1 stays within Monte Carlo noise of M_k = K
    let spec = builtin_spec(ExperimentId::E1b).unwrap();
    let model = spec.model_at(300.0).unwrap();
    let reps = 100;
    let mut base = Vec::new();
    let mut extra = Vec::new();
    for rep in 0..reps {
        let seed = pcc_harness::experiment::rep_seed(5, 0, rep);
        let params = model.build(seed).unwrap();
        let g = params.sample_adjacency(seed + 1);
        let truth = params.labels();
        for (mk, store) in [(3, &mut base), (4, &mut extra)] {
            let d = detect(&g, 3, Method::PccStar, &MethodOptions { mk: Some(mk), ..Default::default() }).unwrap();
            let m = align_and_score(&d.labels, &d.truth_subset(truth), 3).unwrap().mismatches + d.dropped;
            store.push(m as f64 / 300.0);
        }
    }
    let stats = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (mean, var)
    };
    let ((m1, v1), (m2, v2)) = (stats(&base), stats(&extra));
    let se = ((v1 + v2) / reps as f64).sqrt();
    assert!((m1 - m2).abs() <= 3.0 * se + 1e-3, "{m1} vs {m2} (se {se})");
}
