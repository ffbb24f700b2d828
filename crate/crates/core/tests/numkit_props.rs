use proptest::prelude::*;
use skewguard::numkit::{
    chi2_cdf, chi2_quantile, cholesky, covariance, mahalanobis_sq_chol, mvn_sample, solve_cholesky, Matrix, RngStream,
    SymMatrix,
};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn gram(p: usize, entries: &[f64], eps: f64) -> SymMatrix {
    let a = Matrix::from_vec(p, p, entries[..p * p].to_vec()).unwrap();
    let mut g = a.transpose().matmul(&a).unwrap();
    for i in 0..p {
        g[(i, i)] += eps;
    }
    SymMatrix::new(g).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cholesky_reconstructs(p in 1usize..7, entries in prop::collection::vec(-3.0f64..3.0, 36)) {
        let a = gram(p, &entries, 1e-3);
        let l = cholesky(&a).unwrap();
        let back = l.reconstruct();
        let tol = 1e-12 * a.matrix().norm_inf().max(1.0);
        prop_assert!(back.max_abs_diff(a.matrix()) <= tol * 10.0);
    }

    #[test]
    fn cholesky_solve_inverts(p in 1usize..6, entries in prop::collection::vec(-2.0f64..2.0, 25), b in prop::collection::vec(-5.0f64..5.0, 5)) {
        let a = gram(p, &entries, 0.5);
        let l = cholesky(&a).unwrap();
        let x = solve_cholesky(&l, &b[..p]).unwrap();
        let ax = a.matrix().matvec(&x).unwrap();
        for (u, v) in ax.iter().zip(&b[..p]) {
            prop_assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn mahalanobis_affine_invariant(
        entries in prop::collection::vec(-2.0f64..2.0, 9),
        shift in prop::collection::vec(-5.0f64..5.0, 3),
        x in prop::collection::vec(-4.0f64..4.0, 3),
    ) {
        // A nonsingular: gram matrix of random entries plus a diagonal boost
        let a = gram(3, &entries, 1.0).into_matrix();
        let center = [0.5, -1.0, 2.0];
        let s = SymMatrix::new(Matrix::from_rows(&[[2.0, 0.3, 0.1], [0.3, 1.0, -0.2], [0.1, -0.2, 0.7]]).unwrap()).unwrap();
        let d0 = mahalanobis_sq_chol(&x, &center, &cholesky(&s).unwrap()).unwrap();
        let map = |v: &[f64]| -> Vec<f64> {
            a.matvec(v).unwrap().iter().zip(&shift).map(|(u, b)| u + b).collect()
        };
        let s2 = s.congruence(&a).unwrap();
        let d1 = mahalanobis_sq_chol(&map(&x), &map(&center), &cholesky(&s2).unwrap()).unwrap();
        prop_assert!((d0 - d1).abs() <= 1e-8 * d0.max(1.0));
    }

    #[test]
    fn chi2_quantile_inverts_cdf(df in 1u32..40, prob in 0.001f64..0.999) {
        let q = chi2_quantile(df, prob).unwrap();
        prop_assert!((chi2_cdf(df, q) - prob).abs() < 1e-8);
        let oracle = ChiSquared::new(f64::from(df)).unwrap().inverse_cdf(prob);
        prop_assert!((q - oracle).abs() < 1e-6 * oracle.max(1.0));
    }

    #[test]
    fn chi2_cdf_matches_oracle_and_is_monotone(df in 1u32..40, x in 0.0f64..80.0, dx in 0.001f64..5.0) {
        let c = chi2_cdf(df, x);
        let oracle = ChiSquared::new(f64::from(df)).unwrap().cdf(x);
        prop_assert!((c - oracle).abs() < 1e-10);
        prop_assert!(chi2_cdf(df, x + dx) >= c);
    }

    #[test]
    fn streams_are_reproducible(seed in any::<u64>(), stream in any::<u64>()) {
        let mut a = RngStream::new(seed, stream);
        let mut b = RngStream::new(seed, stream);
        for _ in 0..16 {
            prop_assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = RngStream::new(seed, stream).fork(3);
        let mut d = RngStream::new(seed, stream).fork(3);
        prop_assert_eq!(c.standard_normal().to_bits(), d.standard_normal().to_bits());
    }
}

#[test]
fn chi2_reference_quantiles() {
    // independent oracle values
    for (df, p) in [
        (2u32, 0.999),
        (5, 0.999),
        (10, 0.999),
        (2, 0.975),
        (10, 0.975),
        (3, 0.5),
    ] {
        let q = chi2_quantile(df, p).unwrap();
        let o = ChiSquared::new(f64::from(df)).unwrap().inverse_cdf(p);
        assert!((q - o).abs() < 1e-8, "df {df} p {p}: {q} vs {o}");
    }
}

#[test]
fn mvn_draws_have_target_covariance() {
    let s = SymMatrix::new(Matrix::from_rows(&[[1.0, 0.6, 0.0], [0.6, 2.0, -0.4], [0.0, -0.4, 0.5]]).unwrap()).unwrap();
    let l = cholesky(&s).unwrap();
    let mut rng = RngStream::new(17, 0);
    let rows: Vec<Vec<f64>> = (0..100_000)
        .map(|_| mvn_sample(&[1.0, -2.0, 0.0], &l, &mut rng).unwrap())
        .collect();
    let (mean, cov) = covariance(&Matrix::from_rows(&rows).unwrap());
    for (m, t) in mean.iter().zip([1.0, -2.0, 0.0]) {
        assert!((m - t).abs() < 0.02);
    }
    assert!(cov.matrix().max_abs_diff(s.matrix()) < 0.03);
}

#[test]
fn uniform_and_index_ranges() {
    let mut rng = RngStream::new(3, 1);
    let mut counts = [0usize; 7];
    for _ in 0..70_000 {
        let u = rng.uniform();
        assert!((0.0..1.0).contains(&u));
        counts[rng.index(7)] += 1;
    }
    for c in counts {
        assert!((9_400..10_600).contains(&c), "{counts:?}");
    }
}
