//! Compressive sampling matched pursuit.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg::solve_least_squares;
use crate::matrix::{norm1, norm2, Matrix};

pub const DEFAULT_MAX_ITER: usize = 50;
pub const DEFAULT_HALT_TOL: f64 = 1e-6;
/// Relative residual decrease below which an iteration counts as stalled.
pub const STALL_TOL: f64 = 1e-7;

/// Sparse recovery problem `min ‖z − Φx‖₂` subject to `‖x‖₀ ≤ k`.
#[derive(Debug, Clone, Copy)]
pub struct RecoveryProblem<'a> {
    pub phi: &'a Matrix,
    pub z: &'a [f64],
    pub k: usize,
    pub max_iter: usize,
    pub halt_tol: f64,
    /// Permit `3k > m`; least-squares steps on wide supports then use the
    /// minimum-norm solution.
    pub allow_underdetermined: bool,
}

impl<'a> RecoveryProblem<'a> {
    pub fn new(phi: &'a Matrix, z: &'a [f64], k: usize) -> Self {
        RecoveryProblem {
            phi,
            z,
            k,
            max_iter: DEFAULT_MAX_ITER,
            halt_tol: DEFAULT_HALT_TOL,
            allow_underdetermined: false,
        }
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_halt_tol(mut self, halt_tol: f64) -> Self {
        self.halt_tol = halt_tol;
        self
    }

    pub fn relaxed(mut self) -> Self {
        self.allow_underdetermined = true;
        self
    }

    fn check(&self) -> Result<()> {
        let (m, n) = self.phi.shape();
        if self.z.len() != m {
            return Err(Error::dim(format!(
                "{} measurements for a {m}x{n} operator",
                self.z.len()
            )));
        }
        if m > n {
            return Err(Error::dim(format!("operator is {m}x{n}, expected m <= n")));
        }
        if self.k == 0 || self.k > m {
            return Err(Error::param(format!("sparsity k = {} must lie in 1..={m}", self.k)));
        }
        if 3 * self.k > m && !self.allow_underdetermined {
            return Err(Error::param(format!(
                "3k = {} exceeds m = {m}; use the relaxed solver",
                3 * self.k
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter must be positive"));
        }
        if !(self.halt_tol >= 0.0 && self.halt_tol.is_finite()) {
            return Err(Error::param(format!(
                "halt_tol must be finite and >= 0, got {}",
                self.halt_tol
            )));
        }
        if let Some(j) = self.phi.column_norms().iter().position(|&c| c == 0.0) {
            return Err(Error::param(format!("operator column {j} is identically zero")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecoveryResult {
    pub x_hat: Vec<f64>,
    pub iterations: usize,
    /// `‖z − Φ x_hat‖₂` of the returned (best) iterate.
    pub final_residual: f64,
    pub converged: bool,
    /// Some least-squares step was rank deficient and used the minimum-norm solution.
    pub min_norm_used: bool,
}

/// Indices of the `count` largest-magnitude entries, ties to the lowest
/// index, returned in ascending index order.
fn largest(values: &[f64], count: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    let by_magnitude =
        |&a: &usize, &b: &usize| -> Ordering { values[b].abs().total_cmp(&values[a].abs()).then(a.cmp(&b)) };
    if count < idx.len() {
        idx.select_nth_unstable_by(count, by_magnitude);
        idx.truncate(count);
    }
    idx.sort_unstable();
    idx
}

fn residual(phi: &Matrix, z: &[f64], support: &[usize], coef: &[f64]) -> Vec<f64> {
    let mut r = z.to_vec();
    for (i, ri) in r.iter_mut().enumerate() {
        let row = phi.row(i);
        *ri -= support.iter().zip(coef).map(|(&j, c)| row[j] * c).sum::<f64>();
    }
    r
}

pub fn cosamp(p: &RecoveryProblem) -> Result<RecoveryResult> {
    p.check()?;
    let n = p.phi.cols();
    let z_norm = norm2(p.z);
    let mut result = RecoveryResult {
        x_hat: vec![0.0; n],
        iterations: 0,
        final_residual: z_norm,
        converged: z_norm == 0.0,
        min_norm_used: false,
    };
    if result.converged {
        return Ok(result);
    }
    let target = p.halt_tol * z_norm;
    let mut r = p.z.to_vec();
    let mut r_norm = z_norm;
    let mut support: Vec<usize> = Vec::new();

    for it in 1..=p.max_iter {
        let proxy = p.phi.t_mul_vec(&r);
        let mut merged = largest(&proxy, 2 * p.k);
        merged.extend_from_slice(&support);
        merged.sort_unstable();
        merged.dedup();

        let ls = solve_least_squares(&p.phi.select_cols(&merged), p.z)?;
        result.min_norm_used |= ls.min_norm;
        let keep = largest(&ls.x, p.k);
        support = keep.iter().map(|&i| merged[i]).collect();
        let coef: Vec<f64> = keep.iter().map(|&i| ls.x[i]).collect();

        r = residual(p.phi, p.z, &support, &coef);
        let new_norm = norm2(&r);
        result.iterations = it;
        if new_norm < result.final_residual {
            result.final_residual = new_norm;
            result.x_hat = vec![0.0; n];
            for (&j, &c) in support.iter().zip(&coef) {
                result.x_hat[j] = c;
            }
        }
        if new_norm <= target {
            result.converged = true;
            break;
        }
        if r_norm - new_norm < STALL_TOL * r_norm {
            break;
        }
        r_norm = new_norm;
    }
    Ok(result)
}

/// `‖x_hat − x‖₁ < n · 10⁻²`.
pub fn recovery_success(x_hat: &[f64], x: &[f64], n: usize) -> bool {
    assert_eq!(x_hat.len(), x.len(), "recovery_success: length mismatch");
    let diff: Vec<f64> = x_hat.iter().zip(x).map(|(a, b)| a - b).collect();
    norm1(&diff) < n as f64 * 1e-2
}
