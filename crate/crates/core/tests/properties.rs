mod common;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use parcoh::coherence::DebiasContext;
use parcoh::inverse::{clime_solve, complex_recover, glasso_solve, real_embed, threshold_inverse};
use parcoh::linalg::{hermitian_defect, hermitian_eigenvalues, max_abs, CMatrix};
use parcoh::prewhiten::{apply_filter, recolor_spectrum, transfer_function, VarModel};
use parcoh::spectral::{lag_window_estimate, smoothed_periodogram, Kernel, MultivariateSeries};
use parcoh::testing::{fdr_threshold, g_tail, single_test_quantile, PairSet};
use parcoh::Exec;
use proptest::prelude::*;

fn series(seed: u64, n: usize, p: usize) -> MultivariateSeries {
    MultivariateSeries::from_rows(&common::random_series(&mut common::rng(seed), n, p)).unwrap()
}

fn hpd(seed: u64, p: usize) -> CMatrix {
    common::random_hpd(&mut common::rng(seed), p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_estimates_hermitian_and_psd(seed in 0u64..10_000, n in 16usize..80, p in 1usize..5, m in 1usize..8, omega in 0.0..PI) {
        prop_assume!(2 * m < n);
        let s = series(seed, n, p);
        let k = Kernel::bartlett_modified();
        let lw = lag_window_estimate(&s, &k, m, &[omega], Exec::Sequential).unwrap();
        let sp = smoothed_periodogram(&s, &k, m, omega).unwrap();
        for f in [&lw.matrices[0], &sp] {
            let scale = max_abs(f).max(1e-300);
            prop_assert!(hermitian_defect(f) <= 1e-10 * scale.max(1.0));
            let lmin = hermitian_eigenvalues(f)[0];
            prop_assert!(lmin >= -1e-8 * scale, "λmin {lmin} scale {scale}");
        }
        let uni = smoothed_periodogram(&s, &Kernel::uniform(), m, omega).unwrap();
        prop_assert!(hermitian_defect(&uni) <= 1e-10 * max_abs(&uni).max(1.0));
    }

    #[test]
    fn embedding_is_ring_homomorphism(seed in 0u64..10_000, p in 1usize..6) {
        let a = hpd(seed, p);
        let b = hpd(seed + 1, p);
        let ea = real_embed(&a).unwrap();
        let eb = real_embed(&b).unwrap();
        let prod = ea.matrix() * eb.matrix();
        let back = complex_recover(&prod);
        let ab = &a * &b;
        prop_assert!(common::max_diff(&back, &ab) <= 1e-10 * max_abs(&ab));
        prop_assert!(common::max_diff(&complex_recover(ea.matrix()), &a) == 0.0);
        let sum = real_embed(&(&a + &b)).unwrap();
        prop_assert!((sum.matrix() - (ea.matrix() + eb.matrix())).abs().max() <= 1e-12 * max_abs(&a).max(1.0));
    }

    #[test]
    fn clime_feasibility(seed in 0u64..10_000, p in 2usize..5, lambda in 0.02f64..0.6) {
        let s = hpd(seed, p);
        let s = &s / Complex64::new(max_abs(&s), 0.0);
        let est = clime_solve(&s, lambda).unwrap();
        prop_assert!(est.feasibility_gap <= lambda + 1e-7, "gap {} λ {lambda}", est.feasibility_gap);
        prop_assert!(hermitian_defect(&est.matrix) <= 1e-12 * max_abs(&est.matrix).max(1.0));
    }

    #[test]
    fn glasso_hermitian_positive_definite(seed in 0u64..10_000, p in 2usize..6, frac in 0.01f64..0.5) {
        let s = hpd(seed, p);
        let off = (0..p).flat_map(|i| (0..p).map(move |j| (i, j))).filter(|(i, j)| i != j)
            .map(|(i, j)| s[(i, j)].re.abs().max(s[(i, j)].im.abs())).fold(0.0, f64::max);
        let lambda = frac * off.max(1e-3);
        let est = glasso_solve(&s, lambda).unwrap();
        prop_assert!(hermitian_defect(&est.matrix) <= 1e-10 * max_abs(&est.matrix));
        prop_assert!(hermitian_eigenvalues(&est.matrix)[0] > 0.0);
        let t = threshold_inverse(&est, lambda);
        for i in 0..p {
            prop_assert_eq!(t.matrix[(i, i)], est.matrix[(i, i)]);
            for j in 0..p {
                if i != j && t.matrix[(i, j)].norm() > 0.0 {
                    prop_assert!(t.matrix[(i, j)].norm() > lambda);
                }
            }
        }
    }

    #[test]
    fn debiased_rho_pair_conjugation_exact(seed in 0u64..10_000, p in 2usize..6, n in 24usize..64, omega in 0.05..3.0f64) {
        let s = series(seed, n, p);
        let theta = hpd(seed + 7, p);
        let acc = smoothed_periodogram(&s, &Kernel::bartlett_modified(), 4, omega).unwrap();
        let ctx = DebiasContext::new(omega, theta, acc).unwrap();
        for u in 0..p {
            for v in 0..p {
                if u == v { continue; }
                let a = ctx.estimate(u, v).unwrap();
                let b = ctx.estimate(v, u).unwrap();
                prop_assert_eq!(a.rho_de, b.rho_de.conj());
                prop_assert_eq!(a.rho_plugin, b.rho_plugin.conj());
            }
        }
    }

    #[test]
    fn quantile_inverts_tail(d in 1usize..500, alpha in 1e-6f64..0.999) {
        let t = single_test_quantile(d, alpha).unwrap();
        prop_assert!((g_tail(d, t) - alpha).abs() <= 1e-12);
        prop_assert!(g_tail(d, t + 0.5) < g_tail(d, t));
    }

    #[test]
    fn fdr_threshold_respects_bound(ts in prop::collection::vec(0.0f64..40.0, 1..60), d in 1usize..20, alpha in 0.01f64..0.5) {
        let q = ts.len();
        let th = fdr_threshold(&ts, d, alpha).unwrap();
        prop_assert!(th.t_hat <= th.upper + 1e-12);
        let rejected = ts.iter().filter(|&&t| th.rejects(t)).count();
        if th.feasible {
            let ratio = g_tail(d, th.t_hat) * q as f64 / rejected.max(1) as f64;
            prop_assert!(ratio <= alpha * (1.0 + 1e-9), "ratio {ratio}");
        }
        // a larger level never rejects fewer hypotheses
        let looser = fdr_threshold(&ts, d, (alpha * 1.5).min(0.99)).unwrap();
        let rejected_looser = ts.iter().filter(|&&t| looser.rejects(t)).count();
        if th.feasible {
            prop_assert!(rejected_looser >= rejected);
        }
    }

    #[test]
    fn pair_sets_canonical(p in 2usize..8, raw in prop::collection::vec((0usize..8, 0usize..8), 1..10)) {
        let pairs: Vec<(usize, usize)> = raw.into_iter().filter(|(a, b)| a != b && *a < p && *b < p).collect();
        prop_assume!(!pairs.is_empty());
        let set = PairSet::new(&pairs, p).unwrap();
        let got = set.pairs();
        prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(got.iter().all(|&(u, v)| u < v));
    }

    #[test]
    fn recolor_inverts_transfer(seed in 0u64..10_000, p in 1usize..4, omega in 0.0..PI) {
        let mut rng = common::rng(seed);
        let coefs = vec![DMatrix::from_fn(p, p, |_, _| rand::Rng::random_range(&mut rng, -0.3..0.3))];
        let model = VarModel::new(coefs).unwrap();
        let f = hpd(seed + 3, p);
        let phi = transfer_function(&model, omega);
        let white = &phi * &f * phi.adjoint();
        let back = recolor_spectrum(&model, &white, omega).unwrap();
        prop_assert!(common::max_diff(&back, &f) <= 1e-10 * max_abs(&f));
    }
}

#[test]
fn filter_of_exact_var_recovers_innovations() {
    let phi = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, -0.3]);
    let model = VarModel::new(vec![phi.clone()]).unwrap();
    let mut rng = common::rng(3);
    let eps = common::random_series(&mut rng, 50, 2);
    let mut x = vec![vec![0.0; 2]; 50];
    x[0] = eps[0].clone();
    for t in 1..50 {
        for a in 0..2 {
            x[t][a] = eps[t][a] + (0..2).map(|b| phi[(a, b)] * x[t - 1][b]).sum::<f64>();
        }
    }
    let y = apply_filter(&MultivariateSeries::from_rows(&x).unwrap(), &model).unwrap();
    assert_eq!(y.n(), 49);
    for (t, e) in eps[1..].iter().enumerate() {
        for (a, want) in e.iter().enumerate() {
            assert!((y.values()[(t, a)] - want).abs() < 1e-12);
        }
    }
}
