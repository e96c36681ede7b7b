use dictsense::cosamp::{cosamp, recovery_success, RecoveryProblem};
use dictsense::ensembles::{gaussian_matrix, sparse_vector, EnsembleKind, EnsembleSpec, SampleStream};
use dictsense::matrix::norm2;
use dictsense::Matrix;
use proptest::prelude::*;

fn gaussian(rows: usize, cols: usize, seed: u64) -> Matrix {
    gaussian_matrix(&EnsembleSpec::new(EnsembleKind::Gaussian, rows, cols, seed)).unwrap()
}

fn planted(phi: &Matrix, k: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
    let x = sparse_vector(phi.cols(), k, seed).unwrap().to_dense();
    let z = phi.mul_vec(&x);
    (x, z)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn gaussian_regime_recovers_planted_vectors() {
    let mut exact = 0;
    for seed in 0..500u64 {
        let phi = gaussian(64, 256, seed);
        let (x, z) = planted(&phi, 5, 10_000 + seed);
        let out = cosamp(&RecoveryProblem::new(&phi, &z, 5)).unwrap();
        if dist(&out.x_hat, &x) <= 1e-6 {
            exact += 1;
        }
        assert!(out.x_hat.iter().filter(|v| **v != 0.0).count() <= 5);
    }
    let rate = exact as f64 / 500.0;
    assert!(rate >= 0.99, "exact-recovery rate {rate}");
}

#[test]
fn scale_equivariance() {
    for seed in 0..20u64 {
        let phi = gaussian(40, 120, seed);
        let (_, z) = planted(&phi, 6, seed + 99);
        let base = cosamp(&RecoveryProblem::new(&phi, &z, 6)).unwrap();
        for c in [0.5, 2.0, 10.0] {
            let phi_c = phi.scale(c);
            let z_c: Vec<f64> = z.iter().map(|v| v * c).collect();
            let out = cosamp(&RecoveryProblem::new(&phi_c, &z_c, 6)).unwrap();
            assert!(dist(&out.x_hat, &base.x_hat) <= 1e-9, "seed {seed} c {c}");
            assert_eq!(out.iterations, base.iterations);
        }
    }
}

#[test]
fn best_residual_is_monotone_in_max_iter() {
    for seed in 0..10u64 {
        // hard regime so the solver runs many iterations
        let phi = gaussian(24, 128, seed);
        let (_, z) = planted(&phi, 8, seed + 1);
        let mut prev = f64::INFINITY;
        for max_iter in 1..=20 {
            let out = cosamp(&RecoveryProblem::new(&phi, &z, 8).relaxed().with_max_iter(max_iter)).unwrap();
            assert!(out.final_residual <= prev, "seed {seed} max_iter {max_iter}");
            assert!(out.iterations <= max_iter);
            prev = out.final_residual;
        }
    }
}

#[test]
fn reported_residual_matches_returned_iterate() {
    let phi = gaussian(20, 60, 4);
    let mut s = SampleStream::new(4);
    let z: Vec<f64> = (0..20).map(|_| s.standard_normal()).collect();
    let out = cosamp(&RecoveryProblem::new(&phi, &z, 5).relaxed()).unwrap();
    let r: Vec<f64> = phi.mul_vec(&out.x_hat).iter().zip(&z).map(|(a, b)| b - a).collect();
    assert!((norm2(&r) - out.final_residual).abs() <= 1e-12 * norm2(&z));
    assert!(!out.converged);
}

#[test]
fn success_rule_examples() {
    let n = 1024;
    let x = vec![0.0; n];
    let mut xh = x.clone();
    xh[17] = -10.24;
    assert!(!recovery_success(&xh, &x, n));
    xh[17] = -10.23;
    assert!(recovery_success(&xh, &x, n));
    let mut y = vec![0.0; 256];
    y[0] = 1.0;
    y[1] = 1.0;
    assert!(recovery_success(&y, &vec![0.0; 256], 256));
}

/// Smallest least-squares residual over every support of size `k`.
fn exhaustive_best(phi: &Matrix, z: &[f64], k: usize) -> f64 {
    fn rec(start: usize, k: usize, n: usize, chosen: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if chosen.len() == k {
            f(chosen);
            return;
        }
        for j in start..n {
            chosen.push(j);
            rec(j + 1, k, n, chosen, f);
            chosen.pop();
        }
    }
    let mut best = f64::INFINITY;
    rec(0, k, phi.cols(), &mut Vec::new(), &mut |s| {
        // normal equations on a tiny support, solved by Cramer for k ≤ 2
        let cols: Vec<Vec<f64>> = s.iter().map(|&j| phi.col(j)).collect();
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let coef: Vec<f64> = if k == 1 {
            vec![dot(&cols[0], z) / dot(&cols[0], &cols[0])]
        } else {
            let (a, b, c) = (
                dot(&cols[0], &cols[0]),
                dot(&cols[0], &cols[1]),
                dot(&cols[1], &cols[1]),
            );
            let (p, q) = (dot(&cols[0], z), dot(&cols[1], z));
            let det = a * c - b * b;
            vec![(c * p - b * q) / det, (a * q - b * p) / det]
        };
        let r: Vec<f64> = (0..z.len())
            .map(|i| z[i] - cols.iter().zip(&coef).map(|(col, c)| col[i] * c).sum::<f64>())
            .collect();
        best = best.min(norm2(&r));
    });
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn output_is_k_sparse(seed in 0u64..10_000, m in 6usize..30, extra in 0usize..40, k in 1usize..6) {
        let n = m + extra;
        prop_assume!(k <= m);
        let phi = gaussian(m, n, seed);
        let mut s = SampleStream::new(seed + 5);
        let z: Vec<f64> = (0..m).map(|_| s.standard_normal()).collect();
        let out = cosamp(&RecoveryProblem::new(&phi, &z, k).relaxed()).unwrap();
        prop_assert!(out.x_hat.iter().filter(|v| **v != 0.0).count() <= k);
        prop_assert!(out.final_residual <= norm2(&z));
    }

    #[test]
    fn never_beats_exhaustive_search(seed in 0u64..10_000, k in 1usize..3) {
        let phi = gaussian(6, 9, seed);
        let mut s = SampleStream::new(seed + 1);
        let z: Vec<f64> = (0..6).map(|_| s.standard_normal()).collect();
        let out = cosamp(&RecoveryProblem::new(&phi, &z, k)).unwrap();
        let best = exhaustive_best(&phi, &z, k);
        prop_assert!(out.final_residual >= best * (1.0 - 1e-10));
    }
}
