use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use parcoh::linalg::{hermitian_defect, max_abs, CMatrix};
use parcoh::simulation::{
    exact_dft_variance, generate_sparse_varma, max_partial_coherence, model_autocovariances, run_experiment,
    simulate_path, sparse_var1, true_partial_coherence, true_spectral_density, DgpKind, ExperimentConfig,
    Innovations, Method, MAX_RADIUS,
};
use parcoh::Exec;

#[test]
fn generated_models_are_stable_and_sparse() {
    for kind in DgpKind::ALL {
        for seed in 0..4 {
            let m = generate_sparse_varma(12, kind, 0.1, seed).unwrap();
            assert!(m.ar_radius() <= MAX_RADIUS + 1e-12);
            assert!(m.ma_radius() <= MAX_RADIUS + 1e-12);
            assert!(m.s1 > 0.0 && m.s1 <= 0.35, "{kind:?} s1 {}", m.s1);
            assert!(m.s2 <= m.s1);
        }
    }
    let m = sparse_var1(20, 0.05, 9).unwrap();
    assert!(m.ma.is_empty() && m.ar.len() == 1);
    assert!(m.s1 > 0.0 && m.s1 < 0.15, "s1 {}", m.s1);
}

/// `(2π)^{-1} Σ_k Γ(k) e^{-ikω}` from the state-space autocovariances
/// against the transfer-function form.
#[test]
fn spectral_density_matches_autocovariance_sum() {
    let m = generate_sparse_varma(5, DgpKind::Varma11, 0.2, 4).unwrap();
    let gammas = model_autocovariances(&m, 400);
    for i in 0..8 {
        let omega = 0.1 + 0.4 * i as f64;
        let mut f = CMatrix::from_fn(5, 5, |a, b| Complex64::new(gammas[0][(a, b)], 0.0));
        for (k, g) in gammas.iter().enumerate().skip(1) {
            let e = Complex64::from_polar(1.0, -(k as f64) * omega);
            f += CMatrix::from_fn(5, 5, |a, b| e * g[(a, b)] + e.conj() * g[(b, a)]);
        }
        f /= Complex64::new(2.0 * PI, 0.0);
        let want = true_spectral_density(&m, omega).unwrap();
        assert!(max_abs(&(&f - &want)) < 1e-10);
        assert!(hermitian_defect(&want) < 1e-14);
    }
}

#[test]
fn partial_coherence_zero_pattern_and_conjugation() {
    let m = generate_sparse_varma(8, DgpKind::Vma5, 0.1, 2).unwrap();
    let maxima = max_partial_coherence(&m).unwrap();
    for ((u, v), r) in maxima {
        let z = true_partial_coherence(&m, u, v, 0.7).unwrap();
        let w = true_partial_coherence(&m, v, u, 0.7).unwrap();
        assert!((z - w.conj()).norm() < 1e-12);
        assert!(z.norm() <= r + 1e-9 || z.norm() < 1.0);
        if r < 1e-10 {
            assert!(z.norm() < 1e-9);
        }
    }
}

#[test]
fn dft_variance_approaches_density() {
    let m = sparse_var1(4, 0.2, 1).unwrap();
    let f = true_spectral_density(&m, 1.0).unwrap();
    let far = exact_dft_variance(&m, 64, 1.0).unwrap();
    let near = exact_dft_variance(&m, 4096, 1.0).unwrap();
    assert!(max_abs(&(&near - &f)) < max_abs(&(&far - &f)) / 10.0);
}

#[test]
fn empirical_autocovariance_matches_model() {
    let m = generate_sparse_varma(3, DgpKind::Varma11, 0.2, 6).unwrap();
    let x = simulate_path(&m, 200_000, 3, Innovations::Uniform).unwrap();
    let gammas = model_autocovariances(&m, 2);
    let v = x.values();
    let n = v.nrows();
    for (k, g) in gammas.iter().enumerate() {
        let emp = DMatrix::from_fn(3, 3, |a, b| (0..n - k).map(|t| v[(t + k, a)] * v[(t, b)]).sum::<f64>() / n as f64);
        assert!((&emp - g).abs().max() < 0.03 * g.abs().max().max(1.0), "lag {k}");
    }
}

#[test]
fn experiment_is_reproducible_and_serializes() {
    let mut cfg = ExperimentConfig::new(DgpKind::Varma11, 6, 256);
    cfg.replications = 3;
    cfg.seed = 17;
    cfg.methods = vec![Method::Testing];
    let a = run_experiment(&cfg).unwrap();
    cfg.exec = Exec::Sequential;
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.methods.len(), 1);
    assert_eq!(a.per_replication.len(), 3);
    let json = serde_json::to_value(&a).unwrap();
    assert_eq!(json["methods"][0]["method"], "testing");
    assert!(a.table().lines().count() >= 3);
}
