use hsikit::dimred::{fit_pca, fit_rpca};
use hsikit::linalg::{exact_svd, max_principal_angle, randomized_svd, RandomizedSvdParams};
use hsikit::synthetic::matrix_with_spectrum;

fn geometric(n: usize, top: f64, ratio: f64) -> Vec<f64> {
    (0..n).map(|i| top * ratio.powi(i as i32)).collect()
}

#[test]
fn randomized_matches_exact_on_geometric_spectra() {
    let sigma = geometric(200, 10.0, 0.8);
    for seed in 0..3 {
        let a = matrix_with_spectrum(500, 200, &sigma, seed).unwrap();
        let exact = exact_svd(&a, 30).unwrap();
        let approx = randomized_svd(&a, &RandomizedSvdParams::new(30, 100 + seed)).unwrap();
        for i in 0..30 {
            assert!((exact.s[i] - sigma[i]).abs() <= 1e-8 * sigma[0]);
            let rel = (approx.s[i] - exact.s[i]).abs() / exact.s[i];
            assert!(
                rel <= 0.01,
                "seed {seed}, σ_{i}: {} vs {}",
                approx.s[i],
                exact.s[i]
            );
        }
        assert!(approx.u.orthonormality_error() <= 1e-8);
        assert!(approx.vt.transpose().orthonormality_error() <= 1e-8);
    }
}

#[test]
fn rpca_subspace_agrees_with_pca() {
    let sigma = geometric(200, 10.0, 0.8);
    for seed in 0..3 {
        let a = matrix_with_spectrum(500, 200, &sigma, 40 + seed).unwrap();
        let pca = fit_pca(&a, 20).unwrap();
        let rpca = fit_rpca(&a, &RandomizedSvdParams::new(20, seed)).unwrap();
        let angle = max_principal_angle(&pca.components, &rpca.components).unwrap();
        assert!(angle <= 1e-2, "seed {seed}: angle {angle}");
        for (e, r) in pca.explained_variance.iter().zip(&rpca.explained_variance) {
            assert!(r <= &(e * (1.0 + 1e-9)));
        }
    }
}

#[test]
fn full_rank_randomized_is_exact() {
    let sigma = geometric(40, 5.0, 0.9);
    let a = matrix_with_spectrum(60, 40, &sigma, 7).unwrap();
    let params = RandomizedSvdParams::new(40, 3).with_oversampling(0);
    let approx = randomized_svd(&a, &params).unwrap();
    for (s, t) in approx.s.iter().zip(&sigma) {
        assert!((s - t).abs() <= 1e-9 * sigma[0]);
    }
}
