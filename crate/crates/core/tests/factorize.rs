use dictsense::ensembles::{
    gaussian_matrix, random_orthonormal, random_tight_frame, row_selector, EnsembleKind, EnsembleSpec, RowSelector,
    SampleStream,
};
use dictsense::factorize::{
    embedding_gap, factor, factor_gram_schmidt, factor_spectral, factor_tight_frame, gram_equivalence_residual,
    sensing_matrix, validate, FactorMethod, FactorOptions, Factorization,
};
use dictsense::linalg::{default_rank_tol, rank};
use dictsense::{Error, Matrix};

fn ensemble(kind: EnsembleKind, rows: usize, cols: usize, seed: u64) -> Matrix {
    EnsembleSpec::new(kind, rows, cols, seed).sample().unwrap()
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_matrix(&EnsembleSpec::new(EnsembleKind::Gaussian, rows, cols, seed)).unwrap()
}

/// Orthogonal projector of rank `k` on ℝˡ.
fn projector(l: usize, k: usize, seed: u64) -> Matrix {
    let q = random_orthonormal(l, seed).unwrap().leading_cols(k);
    q.matmul_t(&q)
}

fn assert_valid(f: &Factorization, d: &Matrix, tol: f64) {
    let r = validate(f, d).unwrap();
    assert!(r.residual_rel <= tol, "{:?}: residual {:e}", f.method, r.residual_rel);
    assert!(
        r.h_orthonormality_err <= tol,
        "{:?}: H error {:e}",
        f.method,
        r.h_orthonormality_err
    );
    assert_eq!(r.rank_a, r.rank_d);
    assert!(r.g_condition_number.is_finite());
}

#[test]
fn spectral_self_factorization() {
    let d = gaussian(8, 16, 1);
    let f = factor_spectral(&d, &d, default_rank_tol(&d)).unwrap();
    let r = validate(&f, &d).unwrap();
    assert!(r.residual_rel <= 1e-10 && r.h_orthonormality_err <= 1e-10);
    assert_eq!(f.rank, 8);
}

#[test]
fn spectral_rank_deficient_projector_pair() {
    let p = projector(8, 6, 10);
    let d = p.matmul(&gaussian(8, 20, 11));
    let a = p.matmul(&gaussian(8, 20, 12));
    let f = factor_spectral(&d, &a, default_rank_tol(&d)).unwrap();
    assert_eq!(f.rank, 6);
    assert_valid(&f, &d, 1e-8);
}

#[test]
fn rank_deficient_pairs_with_different_ranges() {
    let d = projector(8, 5, 13).matmul(&gaussian(8, 24, 14));
    let a = projector(8, 5, 15).matmul(&gaussian(8, 24, 16));
    for method in [FactorMethod::Spectral, FactorMethod::GramSchmidt] {
        let f = factor(method, &d, &a, &FactorOptions::default()).unwrap();
        assert_eq!(f.rank, 5);
        assert_valid(&f, &d, 1e-8);
        assert!(gram_equivalence_residual(&f, &d) <= 1e-6);
    }
}

#[test]
fn rank_mismatch_is_reported() {
    let d = projector(8, 5, 20).matmul(&gaussian(8, 20, 21));
    let a = projector(8, 6, 22).matmul(&gaussian(8, 20, 23));
    for method in FactorMethod::ALL {
        match factor(method, &d, &a, &FactorOptions::default()) {
            Err(Error::RankMismatch { rank_d, rank_a }) => {
                assert_eq!((rank_d, rank_a), (5, 6));
                assert!(Error::RankMismatch { rank_d, rank_a }.to_string().contains('5'));
            }
            other => panic!("{method:?}: expected rank mismatch, got {other:?}"),
        }
    }
}

#[test]
fn shape_errors() {
    let d = gaussian(4, 8, 1);
    assert!(matches!(
        factor_spectral(&d, &gaussian(4, 9, 2), 1e-9),
        Err(Error::Dimension(_))
    ));
    let tall = gaussian(8, 4, 3);
    assert!(matches!(factor_spectral(&tall, &tall, 1e-9), Err(Error::Dimension(_))));
}

#[test]
fn tight_frame_examples() {
    let d = random_tight_frame(16, 48, 30).unwrap();
    let a = gaussian(16, 48, 31);
    let f = factor_tight_frame(&d, &a, None, default_rank_tol(&d)).unwrap();
    assert_valid(&f, &d, 1e-9);
    let gaag = f.g.matmul(&a).gram_rows();
    assert!(gaag.identity_deviation() <= 1e-9);

    let o = random_orthonormal(16, 32).unwrap();
    let f2 = factor_tight_frame(&d, &a, Some(&o), default_rank_tol(&d)).unwrap();
    assert_valid(&f2, &d, 1e-9);
    assert!(f2.g.matmul(&a).gram_rows().identity_deviation() <= 1e-9);
    assert!(
        f.g.sub(&f2.g).frobenius_norm() > 1e-3,
        "O must change the factorization"
    );
}

#[test]
fn tight_frame_rescales_scaled_frames() {
    let d = random_tight_frame(10, 30, 33).unwrap().scale(3.0);
    let a = gaussian(10, 30, 34);
    let f = factor_tight_frame(&d, &a, None, 1e-9).unwrap();
    assert!((f.frame_scale - 9.0).abs() < 1e-10);
    assert_valid(&f, &d, 1e-9);
}

#[test]
fn tight_frame_rejects_non_frames() {
    let d = gaussian(10, 30, 35);
    let a = gaussian(10, 30, 36);
    match factor_tight_frame(&d, &a, None, 1e-9) {
        Err(Error::NotTightFrame { deviation }) => assert!(deviation > 1e-6),
        other => panic!("expected NotTightFrame, got {other:?}"),
    }
}

#[test]
fn tight_frame_rank_deficient_uses_pseudo_inverses() {
    let (l, n, k) = (8, 24, 5);
    let q = random_orthonormal(l, 40).unwrap().leading_cols(k);
    let d = q.matmul(&random_tight_frame(k, n, 41).unwrap());
    let a = projector(l, k, 42).matmul(&gaussian(l, n, 43));
    let f = factor_tight_frame(&d, &a, None, 1e-9).unwrap();
    assert_eq!(f.rank, k);
    assert_valid(&f, &d, 1e-9);
    assert!(f.g.matmul(&f.g_inv).identity_deviation() <= 1e-10);
    let o = random_orthonormal(l, 44).unwrap();
    assert!(matches!(
        factor_tight_frame(&d, &a, Some(&o), 1e-9),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn gram_schmidt_examples() {
    let d = gaussian(6, 14, 50);
    let f = factor_gram_schmidt(&d, &d, 1e-9).unwrap();
    assert!(validate(&f, &d).unwrap().residual_rel <= 1e-10);

    let d = gaussian(64, 256, 51);
    let a = gaussian(64, 256, 52);
    let f = factor_gram_schmidt(&d, &a, default_rank_tol(&d)).unwrap();
    assert_valid(&f, &d, 1e-8);

    // k = 3 < l = 5: the appended columns decide G.
    let d = gaussian(5, 3, 53).matmul(&gaussian(3, 12, 54));
    let a = gaussian(5, 3, 55).matmul(&gaussian(3, 12, 56));
    let f = factor_gram_schmidt(&d, &a, 1e-9).unwrap();
    assert_eq!(f.rank, 3);
    assert_valid(&f, &d, 1e-8);
}

#[test]
fn validate_examples() {
    let d = gaussian(4, 9, 60);
    let exact = Factorization {
        g: Matrix::identity(4),
        g_inv: Matrix::identity(4),
        a: d.clone(),
        h: Matrix::identity(9),
        method: FactorMethod::Spectral,
        rank: 4,
        tol: 1e-9,
        frame_scale: 1.0,
    };
    let r = validate(&exact, &d).unwrap();
    assert_eq!(r.residual_rel, 0.0);
    assert_eq!(r.h_orthonormality_err, 0.0);
    assert!((r.g_condition_number - 1.0).abs() < 1e-15);

    let d = gaussian(64, 256, 61);
    let a = gaussian(64, 256, 62);
    let f = factor_spectral(&d, &a, default_rank_tol(&d)).unwrap();
    assert!(validate(&f, &d).unwrap().residual_rel <= 1e-8);

    let mut bad = exact.clone();
    bad.h[(0, 0)] += 1e-3;
    assert!(validate(&bad, &exact.a).unwrap().h_orthonormality_err >= 1e-3);
    let mut bad = f.clone();
    bad.h[(3, 7)] += 1e-3;
    assert!(validate(&bad, &d).unwrap().h_orthonormality_err >= 1e-5);
}

#[test]
fn sensing_matrix_examples() {
    let d = gaussian(6, 10, 70);
    let trivial = Factorization {
        g: Matrix::identity(6),
        g_inv: Matrix::identity(6),
        a: d.clone(),
        h: Matrix::identity(10),
        method: FactorMethod::Spectral,
        rank: 6,
        tol: 1e-9,
        frame_scale: 1.0,
    };
    let e = RowSelector::from_indices(6, vec![4, 1]).unwrap();
    let s = sensing_matrix(&trivial, &e).unwrap();
    assert_eq!(s, Matrix::identity(6).select_rows(&[4, 1]));

    let a = gaussian(6, 10, 71);
    let f = factor_spectral(&d, &a, 1e-9).unwrap();
    let full = RowSelector::full(6);
    assert!(embedding_gap(&f, &d, &full).unwrap() <= 1e-8);
    assert!(sensing_matrix(&f, &RowSelector::full(5)).is_err());

    let mut singular = trivial.clone();
    singular.g = Matrix::diag(&[1.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
    assert!(matches!(sensing_matrix(&singular, &e), Err(Error::Singular { .. })));
}

#[test]
fn completion_seeds_give_distinct_valid_factorizations() {
    let d = gaussian(6, 20, 80);
    let a = gaussian(6, 20, 81);
    for method in [FactorMethod::Spectral, FactorMethod::GramSchmidt] {
        let f1 = factor(
            method,
            &d,
            &a,
            &FactorOptions {
                completion_seed: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let f2 = factor(
            method,
            &d,
            &a,
            &FactorOptions {
                completion_seed: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_valid(&f1, &d, 1e-8);
        assert_valid(&f2, &d, 1e-8);
        assert!(f1.h.sub(&f2.h).frobenius_norm() > 1e-3);
    }
    let d = random_tight_frame(6, 20, 82).unwrap();
    let opts = |s| FactorOptions {
        completion_seed: Some(s),
        ..Default::default()
    };
    let f1 = factor(FactorMethod::TightFrame, &d, &a, &opts(1)).unwrap();
    let f2 = factor(FactorMethod::TightFrame, &d, &a, &opts(2)).unwrap();
    assert_valid(&f1, &d, 1e-8);
    assert_valid(&f2, &d, 1e-8);
    assert!(f1.h.sub(&f2.h).frobenius_norm() > 1e-3);
}

/// 100 seeded pairs per construction, full rank and equal-rank deficient,
/// Gaussian and Bernoulli.
#[test]
fn all_constructions_on_seeded_pairs() {
    let mut stream = SampleStream::new(2024);
    for method in FactorMethod::ALL {
        for t in 0..100u64 {
            let l = 3 + stream.below(10) as usize;
            let n = l + stream.below(30) as usize;
            let kind = if t % 2 == 0 {
                EnsembleKind::Gaussian
            } else {
                EnsembleKind::Bernoulli
            };
            let deficient = t % 4 >= 2;
            let k = if deficient {
                1 + stream.below((l - 1) as u64) as usize
            } else {
                l
            };
            let seed = 10_000 * (method as u64 + 1) + 10 * t;
            // Small ±1 matrices can be rank deficient; redraw until full rank.
            let a = (0..)
                .map(|r| ensemble(kind, l, n, seed + 1_000_000 * r))
                .find(|a| rank(a, default_rank_tol(a)).unwrap() == l)
                .unwrap();
            let a = if deficient {
                projector(l, k, seed + 1).matmul(&a)
            } else {
                a
            };
            let d = match (method, deficient) {
                (FactorMethod::TightFrame, false) => random_tight_frame(l, n, seed + 2).unwrap(),
                (FactorMethod::TightFrame, true) => random_orthonormal(l, seed + 2)
                    .unwrap()
                    .leading_cols(k)
                    .matmul(&random_tight_frame(k, n, seed + 3).unwrap()),
                (_, false) => gaussian(l, n, seed + 2),
                (_, true) => projector(l, k, seed + 3).matmul(&gaussian(l, n, seed + 2)),
            };
            let f = factor(method, &d, &a, &FactorOptions::default())
                .unwrap_or_else(|e| panic!("{method:?} trial {t} ({l}x{n}, rank {k}): {e}"));
            assert_eq!(f.rank, k);
            assert_valid(&f, &d, 1e-8);
            assert!(gram_equivalence_residual(&f, &d) <= 1e-6);
            let e = row_selector(1 + stream.below(l as u64) as usize, l, seed + 4).unwrap();
            assert!(embedding_gap(&f, &d, &e).unwrap() <= 1e-8);
        }
    }
}
