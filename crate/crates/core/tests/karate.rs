use pcc_core::clustering::align_and_score;
use pcc_core::datasets::karate;
use pcc_core::methods::{detect, star_sweep, Method, MethodOptions};

fn errors(method: Method, opts: &MethodOptions) -> usize {
    let (g, truth) = karate();
    let d = detect(&g, 2, method, opts).unwrap();
    align_and_score(&d.labels, &truth, 2).unwrap().mismatches
}

#[test]
fn leading_eigenvalues() {
    let (g, _) = karate();
    let d = detect(&g, 2, Method::PccPlus, &MethodOptions::default()).unwrap();
    let expected = [6.7257, 4.9771, -4.4871];
    for (v, e) in d.eigenvalues.iter().zip(expected) {
        assert!((v - e).abs() < 1e-3, "{v} vs {e}");
    }
}

#[test]
fn adjacency_methods_recover_factions() {
    let opts = MethodOptions::default();
    for m in [Method::Pcc, Method::PccPlus, Method::PccStar] {
        assert_eq!(errors(m, &opts), 0, "{m}");
    }
}

#[test]
fn laplacian_methods_recover_factions() {
    let opts = MethodOptions::default();
    for m in [Method::Npcc, Method::NpccPlus, Method::NpccStar, Method::Rsc] {
        assert_eq!(errors(m, &opts), 0, "{m}");
    }
}

#[test]
fn npcc_is_insensitive_to_tau() {
    for tau in 0..=10 {
        let opts = MethodOptions { tau: Some(tau as f64), ..Default::default() };
        assert_eq!(errors(Method::Npcc, &opts), 0, "tau = {tau}");
    }
}

#[test]
fn star_sweep_is_flat_and_matches_one_shot_runs() {
    let (g, truth) = karate();
    let opts = MethodOptions::default();
    let grid: Vec<usize> = (2..=20).collect();
    for method in [Method::PccStar, Method::NpccStar] {
        let sweep = star_sweep(&g, 2, method, &grid, &opts).unwrap();
        for (d, &mk) in sweep.iter().zip(&grid) {
            let one_shot = detect(&g, 2, method, &MethodOptions { mk: Some(mk), ..opts }).unwrap();
            assert_eq!(d.labels, one_shot.labels, "{method} M_k = {mk}");
            if method == Method::PccStar {
                assert_eq!(align_and_score(&d.labels, &truth, 2).unwrap().mismatches, 0, "M_k = {mk}");
            }
        }
    }
}

#[test]
fn base_variants_coincide() {
    let (g, _) = karate();
    let opts = MethodOptions::default();
    let pcc = detect(&g, 2, Method::Pcc, &opts).unwrap();
    let star = detect(&g, 2, Method::PccStar, &MethodOptions { mk: Some(2), ..opts }).unwrap();
    assert_eq!(pcc.labels, star.labels);
    let npcc = detect(&g, 2, Method::Npcc, &opts).unwrap();
    let nstar = detect(&g, 2, Method::NpccStar, &opts).unwrap();
    assert_eq!(npcc.labels, nstar.labels);
    // with a tiny threshold the + rule never fires
    let strict = MethodOptions { threshold_t: 1e-6, ..opts };
    assert_eq!(detect(&g, 2, Method::PccPlus, &strict).unwrap().labels, pcc.labels);
    assert_eq!(detect(&g, 2, Method::NpccPlus, &strict).unwrap().labels, npcc.labels);
}

#[test]
fn score_baseline_runs() {
    let n = errors(Method::Score, &MethodOptions::default());
    assert!(n <= 2, "{n}");
}
