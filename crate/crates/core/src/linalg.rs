//! Dense decompositions used by the factorizations.
//!
//! Two Jacobi iterations carry everything: a two-sided cyclic Jacobi for
//! symmetric eigenproblems ([`sym_eig`]) and a one-sided (Hestenes) Jacobi
//! for singular values ([`svd`]). The one-sided variant diagonalizes the Gram
//! matrix of the short side implicitly, so singular values keep full relative
//! accuracy instead of losing half the digits to squaring. Rank, pseudo-inverse
//! and condition numbers all go through it.
//!
//! Eigen/singular vectors are returned in non-increasing order of their
//! values, with signs fixed so that each vector's largest-magnitude entry is
//! positive. That makes every downstream factorization deterministic.

use crate::error::{Error, Result};
use crate::matrix::{dot, norm2, Matrix};

/// Sweep cap shared by both Jacobi iterations.
pub const MAX_SWEEPS: usize = 100;

/// Default relative rank tolerance: singular values at or below
/// `1e-10 · max(rows, cols) · σ_max` count as zero.
pub fn default_rank_tol(m: &Matrix) -> f64 {
    1e-10 * m.rows().max(m.cols()).max(1) as f64
}

/// Eigen-decomposition `s = q · diag(lambda) · qᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// Orthonormal eigenvectors, one per column.
    pub q: Matrix,
    /// Eigenvalues, non-increasing.
    pub lambda: Vec<f64>,
}

impl SpectralDecomposition {
    pub fn reconstruct(&self) -> Matrix {
        self.q.scale_cols(&self.lambda).matmul_t(&self.q)
    }
}

/// Thin singular value decomposition `m = u · diag(s) · vᵀ` with
/// `r = min(rows, cols)` triplets.
///
/// The vectors on the short side of `m` form a complete orthonormal basis
/// even where `s` vanishes; on the long side only the columns with nonzero
/// `s` are meaningful.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values strictly above `tol · σ_max`.
    pub fn rank(&self, tol: f64) -> usize {
        let cutoff = tol * self.sigma_max();
        if self.sigma_max() == 0.0 {
            return 0;
        }
        self.s.iter().take_while(|&&s| s > cutoff).count()
    }
}

/// Cyclic Jacobi eigen-decomposition of a symmetric matrix.
pub fn sym_eig(s: &Matrix) -> Result<SpectralDecomposition> {
    if !s.is_square() {
        return Err(Error::dim(format!(
            "sym_eig needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let n = s.rows();
    let scale = s.frobenius_norm();
    let asym = s.sub(&s.transpose()).frobenius_norm();
    if asym > 1e-10 * scale.max(1.0) {
        return Err(Error::param(format!(
            "sym_eig input is not symmetric (asymmetry {asym:e})"
        )));
    }
    let mut a = s.symmetrize();
    let mut v = Matrix::identity(n);
    if n == 0 {
        return Ok(SpectralDecomposition { q: v, lambda: vec![] });
    }

    let off = |a: &Matrix| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                sum += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        sum.sqrt()
    };

    let target = f64::EPSILON * scale;
    let mut converged = off(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Skip rotations that cannot change the diagonal in floating point.
                if sweeps > 4 && apq.abs() * 1e18 < app.abs() && apq.abs() * 1e18 < aqq.abs() {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        converged = off(&a) <= target;
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "sym_eig did not converge after {MAX_SWEEPS} sweeps (off-diagonal residual {:e})",
            off(&a)
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]).then(i.cmp(&j)));
    let lambda = order.iter().map(|&i| a[(i, i)]).collect();
    let mut q = v.select_cols(&order);
    for j in 0..n {
        let col = q.col(j);
        if leading_sign(&col) < 0.0 {
            q.set_col(j, &col.iter().map(|x| -x).collect::<Vec<_>>());
        }
    }
    Ok(SpectralDecomposition { q, lambda })
}

/// Sign of the largest-magnitude entry (first one on ties).
fn leading_sign(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for &x in v {
        if x.abs() > best.abs() {
            best = x;
        }
    }
    if best < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// One-sided Jacobi SVD.
pub fn svd(m: &Matrix) -> Result<Svd> {
    if m.rows() <= m.cols() {
        let (short, s, long) = row_jacobi(m)?;
        Ok(Svd { u: short, s, v: long })
    } else {
        let (short, s, long) = row_jacobi(&m.transpose())?;
        Ok(Svd { u: long, s, v: short })
    }
}

/// Orthogonalizes the rows of a wide matrix `m` (r × n, r ≤ n) by plane
/// rotations. Returns `(w, s, y)` with `m = w · diag(s) · yᵀ`, `w` r × r
/// orthonormal and `y` n × r.
fn row_jacobi(m: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let r = m.rows();
    let n = m.cols();
    let mut y = m.clone();
    let mut vt = Matrix::identity(r);
    let mut norms: Vec<f64> = (0..r).map(|i| dot(y.row(i), y.row(i))).collect();
    // Rows at rounding-noise level are numerically zero; rotating them
    // against the rest never settles.
    let noise = (f64::EPSILON * m.frobenius_norm()).powi(2);
    let orth_tol = (n.max(1) as f64).sqrt() * f64::EPSILON;

    let mut sweeps = 0;
    loop {
        let mut rotated = false;
        for p in 0..r {
            for q in (p + 1)..r {
                let alpha = norms[p];
                let beta = norms[q];
                if alpha <= noise || beta <= noise {
                    continue;
                }
                let gamma = dot(y.row(p), y.row(q));
                if gamma.abs() <= orth_tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut y, p, q, c, s);
                rotate_rows(&mut vt, p, q, c, s);
                norms[p] = dot(y.row(p), y.row(p));
                norms[q] = dot(y.row(q), y.row(q));
            }
        }
        sweeps += 1;
        if !rotated {
            break;
        }
        if sweeps >= MAX_SWEEPS {
            let mut worst = 0.0f64;
            for p in 0..r {
                for q in (p + 1)..r {
                    let denom = (norms[p] * norms[q]).sqrt();
                    if norms[p] > noise && norms[q] > noise {
                        worst = worst.max(dot(y.row(p), y.row(q)).abs() / denom);
                    }
                }
            }
            return Err(Error::Numerical(format!(
                "svd did not converge after {MAX_SWEEPS} sweeps (residual cosine {worst:e})"
            )));
        }
    }

    let sigma: Vec<f64> = (0..r).map(|i| norm2(y.row(i))).collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let mut w = Matrix::zeros(r, r);
    let mut long = Matrix::zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        let mut wcol = vt.row(src).to_vec();
        let sign = leading_sign(&wcol);
        wcol.iter_mut().for_each(|x| *x *= sign);
        w.set_col(dst, &wcol);
        let sv = sigma[src];
        s.push(sv);
        if sv > 0.0 {
            let ycol: Vec<f64> = y.row(src).iter().map(|x| sign * x / sv).collect();
            long.set_col(dst, &ycol);
        }
    }
    Ok((w, s, long))
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let (rp, rq) = m.row_pair_mut(p, q);
    for (a, b) in rp.iter_mut().zip(rq.iter_mut()) {
        let x = *a;
        let y = *b;
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Numerical rank: singular values above `tol · σ_max`.
pub fn rank(m: &Matrix, tol: f64) -> Result<usize> {
    check_tol(tol)?;
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0);
    }
    Ok(svd(m)?.rank(tol))
}

/// Moore–Penrose pseudo-inverse, truncating singular values at `tol · σ_max`.
pub fn pinv(m: &Matrix, tol: f64) -> Result<Matrix> {
    check_tol(tol)?;
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(Matrix::zeros(m.cols(), m.rows()));
    }
    let d = svd(m)?;
    Ok(pinv_from_svd(&d, tol))
}

pub(crate) fn pinv_from_svd(d: &Svd, tol: f64) -> Matrix {
    let k = d.rank(tol);
    let inv: Vec<f64> = d.s[..k].iter().map(|s| 1.0 / s).collect();
    d.v.leading_cols(k).scale_cols(&inv).matmul_t(&d.u.leading_cols(k))
}

/// Orthonormal basis (as columns) of the column space of `m`, by modified
/// Gram–Schmidt with one reorthogonalization pass.
///
/// A column is dropped when its residual after projection is at most
/// `tol · ‖m‖_F / √cols`, which bounds `‖(I − BBᵀ)m‖_F ≤ tol · ‖m‖_F`. For a
/// row-space basis pass the transpose.
pub fn orthonormal_range_basis(m: &Matrix, tol: f64) -> Result<Matrix> {
    check_tol(tol)?;
    let n = m.rows();
    let threshold = tol * m.frobenius_norm() / (m.cols().max(1) as f64).sqrt();
    let columns = m.transpose();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    if m.frobenius_norm() == 0.0 {
        return Ok(Matrix::zeros(n, 0));
    }
    for j in 0..columns.rows() {
        let mut v = columns.row(j).to_vec();
        for _pass in 0..2 {
            for b in &basis {
                let c = dot(b, &v);
                v.iter_mut().zip(b).for_each(|(x, bi)| *x -= c * bi);
            }
        }
        let r = norm2(&v);
        if r > threshold && basis.len() < n {
            v.iter_mut().for_each(|x| *x /= r);
            basis.push(v);
        }
    }
    Ok(Matrix::from_columns(n, &basis))
}

/// Orthonormal basis (as columns) of the null space of `m`.
pub fn nullspace_basis(m: &Matrix, tol: f64) -> Result<Matrix> {
    check_tol(tol)?;
    let row_basis = orthonormal_range_basis(&m.transpose(), tol)?;
    Ok(orthogonal_complement(&row_basis))
}

/// Completes orthonormal columns `b` (n × k) to an orthonormal basis of
/// ℝⁿ and returns the n × (n − k) complement.
///
/// Uses the trailing columns of the Householder `Q` of `b`.
pub fn orthogonal_complement(b: &Matrix) -> Matrix {
    let n = b.rows();
    let k = b.cols();
    let reflectors = householder_reflectors(b);
    let mut complement: Vec<Vec<f64>> = Vec::with_capacity(n - k);
    for i in k..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for v in reflectors.iter().rev() {
            apply_reflector(v, &mut e);
        }
        complement.push(e);
    }
    Matrix::from_columns(n, &complement)
}

/// Householder vectors `v_j` (unit length, zero above `j`) reducing the
/// columns of `b` to upper-triangular form: `H_k ⋯ H_1 b = R`.
fn householder_reflectors(b: &Matrix) -> Vec<Vec<f64>> {
    let n = b.rows();
    let k = b.cols().min(n);
    let mut work = b.transpose();
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let x = &work.row(j)[j..];
        let alpha = norm2(x);
        let mut v = vec![0.0; n];
        v[j..].copy_from_slice(x);
        let sign = if v[j] >= 0.0 { 1.0 } else { -1.0 };
        v[j] += sign * alpha;
        let vn = norm2(&v);
        if vn == 0.0 {
            // Degenerate column: identity reflector.
            out.push(v);
            continue;
        }
        v.iter_mut().for_each(|x| *x /= vn);
        for c in j..k {
            apply_reflector(&v, work.row_mut(c));
        }
        out.push(v);
    }
    out
}

fn apply_reflector(v: &[f64], x: &mut [f64]) {
    let c = 2.0 * dot(v, x);
    if c != 0.0 {
        x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= c * vi);
    }
}

/// `s^p` for symmetric positive-definite `s` through its eigen-decomposition.
/// Fails with [`Error::Singular`] when an eigenvalue is at or below
/// `1e-12 · λ_max`.
pub fn spd_power(s: &Matrix, p: f64) -> Result<Matrix> {
    let eig = sym_eig(s)?;
    let lambda_max = eig.lambda.first().copied().unwrap_or(0.0);
    let cutoff = 1e-12 * lambda_max.abs().max(f64::MIN_POSITIVE);
    if let Some(&bad) = eig.lambda.iter().find(|&&l| l <= cutoff) {
        return Err(Error::Singular { eigenvalue: bad });
    }
    let powered: Vec<f64> = eig.lambda.iter().map(|l| l.powf(p)).collect();
    Ok(eig.q.scale_cols(&powered).matmul_t(&eig.q))
}

/// `s^{-1/2}` for symmetric positive-definite `s`.
pub fn inv_sqrt_spd(s: &Matrix) -> Result<Matrix> {
    spd_power(s, -0.5)
}

/// Inverse of a square matrix by LU with partial pivoting.
pub fn inverse(m: &Matrix) -> Result<Matrix> {
    if !m.is_square() {
        return Err(Error::dim(format!(
            "inverse needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut lu = m.clone();
    let mut inv = Matrix::identity(n);
    let scale = m.max_abs();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| lu[(a, col)].abs().total_cmp(&lu[(b, col)].abs()))
            .unwrap();
        let pivot = lu[(pivot_row, col)];
        if pivot.abs() <= 1e-14 * scale * n as f64 || pivot == 0.0 {
            return Err(Error::Singular { eigenvalue: pivot });
        }
        if pivot_row != col {
            swap_rows(&mut lu, col, pivot_row);
            swap_rows(&mut inv, col, pivot_row);
        }
        let prow = lu.row(col).to_vec();
        let irow = inv.row(col).to_vec();
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = lu[(r, col)] / pivot;
            if f == 0.0 {
                continue;
            }
            lu.row_mut(r).iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
            inv.row_mut(r).iter_mut().zip(&irow).for_each(|(x, p)| *x -= f * p);
        }
        lu.row_mut(col).iter_mut().for_each(|x| *x /= pivot);
        inv.row_mut(col).iter_mut().for_each(|x| *x /= pivot);
    }
    Ok(inv)
}

fn swap_rows(m: &mut Matrix, a: usize, b: usize) {
    let ra = m.row(a).to_vec();
    let rb = m.row(b).to_vec();
    m.row_mut(a).copy_from_slice(&rb);
    m.row_mut(b).copy_from_slice(&ra);
}

/// Result of [`solve_least_squares`].
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub x: Vec<f64>,
    /// Set when `a` was rank deficient and the minimum-norm solution was used.
    pub min_norm: bool,
}

/// Minimizes `‖a x − b‖₂` by Householder QR; falls back to `pinv(a) · b`
/// when `a` is wide or rank deficient at the default tolerance.
pub fn solve_least_squares(a: &Matrix, b: &[f64]) -> Result<LeastSquares> {
    if a.rows() != b.len() {
        return Err(Error::dim(format!(
            "least squares: {} rows but {} right-hand side entries",
            a.rows(),
            b.len()
        )));
    }
    let (m, n) = a.shape();
    if n == 0 {
        return Ok(LeastSquares {
            x: vec![],
            min_norm: false,
        });
    }
    if m >= n {
        let reflectors = householder_reflectors(a);
        // R = H_n ⋯ H_1 a, y = H_n ⋯ H_1 b.
        let mut cols = a.transpose();
        for c in 0..n {
            for v in &reflectors {
                apply_reflector(v, cols.row_mut(c));
            }
        }
        let mut y = b.to_vec();
        for v in &reflectors {
            apply_reflector(v, &mut y);
        }
        let rmax = (0..n).fold(0.0f64, |acc, j| acc.max(cols[(j, j)].abs()));
        let cutoff = default_rank_tol(a) * rmax;
        if rmax > 0.0 && (0..n).all(|j| cols[(j, j)].abs() > cutoff) {
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut acc = y[i];
                for j in (i + 1)..n {
                    acc -= cols[(j, i)] * x[j];
                }
                x[i] = acc / cols[(i, i)];
            }
            return Ok(LeastSquares { x, min_norm: false });
        }
    }
    let p = pinv(a, default_rank_tol(a))?;
    Ok(LeastSquares {
        x: p.mul_vec(b),
        min_norm: true,
    })
}

/// `σ_max / σ_min` (infinite when singular).
pub fn condition_number(m: &Matrix) -> Result<f64> {
    let d = svd(m)?;
    let smin = d.s.last().copied().unwrap_or(0.0);
    Ok(if smin == 0.0 {
        f64::INFINITY
    } else {
        d.sigma_max() / smin
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::param(format!("tolerance must be positive, got {tol}")))
    }
}
