//! Model matrices, sampling frequencies and exact recovery on population inputs.

use nalgebra::DMatrix;
use pcc_core::clustering::KMeansConfig;
use pcc_core::dcsbm::{
    check_assumptions, error_bound, error_bound_for_theta, population_model, verify_ideal_npcc,
    verify_ideal_pcc, DcsbmParams, ParamSpec,
};
use pcc_core::graph::LabelVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// P with diagonal in [0.6, 1], off-diagonal in [0, 0.15], θ in [0.2, 1].
fn well_separated(n: usize, k: usize, seed: u64) -> DcsbmParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = DMatrix::zeros(k, k);
    for a in 0..k {
        p[(a, a)] = rng.random_range(0.6..=1.0);
        for b in 0..a {
            let v = rng.random_range(0.0..=0.15);
            p[(a, b)] = v;
            p[(b, a)] = v;
        }
    }
    let labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.random_range(0..k) }).collect();
    let theta = (0..n).map(|_| rng.random_range(0.2..=1.0)).collect();
    DcsbmParams::new(p, theta, LabelVector::new(labels, k).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn omega_matches_elementwise_definition(n in 2usize..40, k in 1usize..4, seed in any::<u64>()) {
        let params = well_separated(n.max(k), k, seed);
        let omega = params.build_omega();
        let (p, theta, g) = (params.p(), params.theta(), params.labels().as_slice());
        for i in 0..params.n() {
            for j in 0..params.n() {
                prop_assert_eq!(omega[(i, j)], theta[i] * theta[j] * p[(g[i], g[j])]);
            }
        }
        // matrix form Θ Z P Z' Θ
        let z = DMatrix::from_fn(params.n(), k, |i, c| if g[i] == c { 1.0 } else { 0.0 });
        let t = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(theta));
        let product = &t * &z * p * z.transpose() * &t;
        prop_assert!((product - omega).amax() < 1e-15);
    }

    #[test]
    fn laplacian_product_form(n in 4usize..60, k in 2usize..5, seed in any::<u64>(), tau in 0.0f64..20.0) {
        let params = well_separated(n.max(k), k, seed);
        let model = population_model(&params, tau).unwrap();
        prop_assert!(model.laplacian_gap() < 1e-12, "{}", model.laplacian_gap());
        let d = model.d_tilde.iter().map(|x| x * x).sum::<f64>();
        prop_assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sample_is_simple_and_within_support(n in 2usize..50, seed in any::<u64>()) {
        let labels = LabelVector::new((0..n).map(|i| i % 2).collect(), 2).unwrap();
        let p = DMatrix::from_row_slice(2, 2, &[0.7, 0.0, 0.0, 0.5]);
        let params = DcsbmParams::new(p, vec![0.9; n], labels).unwrap();
        let g = params.sample_adjacency(seed);
        for (i, j) in g.edges() {
            prop_assert!(i != j);
            prop_assert!(params.omega(i, j) > 0.0);
        }
        prop_assert!(g.edges().eq(params.sample_adjacency(seed).edges()));
    }

    #[test]
    fn error_bound_scales_inversely_with_theta_squared(n in 10usize..500, c in 0.05f64..1.0, s in 0.1f64..1.0) {
        let theta: Vec<f64> = (0..n).map(|i| c * (1.0 + (i % 7) as f64 / 7.0) / 2.0).collect();
        let scaled: Vec<f64> = theta.iter().map(|t| t * s).collect();
        let ratio = error_bound_for_theta(&scaled, 1.0) / error_bound_for_theta(&theta, 1.0);
        prop_assert!((ratio * s * s - 1.0).abs() < 1e-10);
    }
}

#[test]
fn ideal_pcc_and_npcc_recover_every_draw() {
    let cfg = KMeansConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for draw in 0..60 {
        let n = rng.random_range(20..=200);
        let k = rng.random_range(2..=4);
        let params = well_separated(n, k, draw);
        let pcc = verify_ideal_pcc(&params, &cfg).unwrap();
        assert!(pcc.passed(), "draw {draw}: {:?}", pcc.failures);
        assert_eq!(pcc.result.mismatches, 0);
        assert_eq!(pcc.distinct_rows, k);
        let tau = rng.random_range(0.0..10.0);
        let npcc = verify_ideal_npcc(&params, tau, &cfg).unwrap();
        assert!(npcc.passed(), "draw {draw}: {:?}", npcc.failures);
        assert!(npcc.intertwining_gap.unwrap() < 1e-8);
    }
}

#[test]
fn ideal_recovery_on_three_block_example() {
    let params = ParamSpec::three_block_example(1).build(0).unwrap();
    assert_eq!(params.n(), 90);
    let cfg = KMeansConfig::default();
    verify_ideal_pcc(&params, &cfg).unwrap().ensure().unwrap();
    verify_ideal_npcc(&params, 5.0, &cfg).unwrap().ensure().unwrap();
}

#[test]
fn edge_frequencies_match_omega() {
    let labels = LabelVector::new(vec![0, 0, 1, 1, 0, 1], 2).unwrap();
    let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 0.6]);
    let params = DcsbmParams::new(p, vec![1.0, 0.5, 0.8, 0.3, 0.7, 0.9], labels).unwrap();
    let reps = 10_000;
    let n = params.n();
    let mut counts = vec![vec![0usize; n]; n];
    for seed in 0..reps {
        for (i, j) in params.sample_adjacency(seed as u64).edges() {
            counts[i][j] += 1;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let p = params.omega(i, j);
            let freq = counts[i][j] as f64 / reps as f64;
            let sigma = (p * (1.0 - p) / reps as f64).sqrt();
            assert!((freq - p).abs() <= 3.0 * sigma, "({i},{j}): {freq} vs {p}");
        }
    }
}

#[test]
fn error_bound_for_constant_theta() {
    // with θ ≡ c the bound collapses to 4(4·sqrt(log n/(n c²)) + sqrt(C log n/(n c²)))²
    for &(n, c, big_c) in &[(100usize, 0.5, 1.0), (1000, 0.2, 1.0), (400, 0.9, 3.0), (50, 1.0, 0.5)] {
        let theta = vec![c; n];
        let nf = n as f64;
        let closed = 4.0 * (4.0 * (nf.ln() / (nf * c * c)).sqrt() + (big_c * nf.ln() / (nf * c * c)).sqrt()).powi(2);
        let got = error_bound_for_theta(&theta, big_c);
        assert!((got - closed).abs() < 1e-12 * closed, "n={n}: {got} vs {closed}");
    }
}

#[test]
fn error_bound_shrinks_with_n() {
    let mut last = f64::INFINITY;
    for n in [100, 200, 400, 800, 1600, 3200] {
        let labels = LabelVector::new((0..n).map(|i| i % 2).collect(), 2).unwrap();
        let params = DcsbmParams::new(DMatrix::from_row_slice(2, 2, &[0.9, 0.3, 0.3, 0.8]), vec![0.4; n], labels).unwrap();
        let b = error_bound(&params, 1.0);
        assert!(b < last);
        last = b;
    }
}

#[test]
fn assumption_report() {
    let labels = LabelVector::new((0..100).map(|i| usize::from(i >= 50)).collect(), 2).unwrap();
    let p = DMatrix::from_row_slice(2, 2, &[0.9, 0.3, 0.3, 0.8]);
    let theta: Vec<f64> = (0..100).map(|i| if i < 50 { 0.2 } else { 0.6 }).collect();
    let params = DcsbmParams::new(p.clone(), theta.clone(), labels).unwrap();
    let report = check_assumptions(&params);
    // ‖θ^{(1)}‖ = 0.2·√50, ‖θ^{(2)}‖ = 0.6·√50
    assert!((report.balance - 3.0).abs() < 1e-12);
    let l2sq: f64 = theta.iter().map(|t| t * t).sum();
    let want = 100f64.ln() * 0.6 * 40.0 / (l2sq * l2sq);
    assert!((report.sparsity - want).abs() < 1e-12);
    let d = [0.2 * 50f64.sqrt() / l2sq.sqrt(), 0.6 * 50f64.sqrt() / l2sq.sqrt()];
    let b = DMatrix::from_fn(2, 2, |i, j| d[i] * p[(i, j)] * d[j]);
    let eig = b.symmetric_eigenvalues();
    assert!((report.eigen_spacing.unwrap() - (eig[0] - eig[1]).abs()).abs() < 1e-12);
    assert!((report.theta_l3_cubed - 50.0 * (0.008 + 0.216)).abs() < 1e-12);
}
