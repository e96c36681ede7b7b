//! Factorizations `D = G·A·H` of a dictionary `D` against a random matrix
//! `A` of equal rank, with `G` invertible and `H` orthonormal.
//!
//! Given such a factorization, the sensing matrix `S = 𝓔·G⁻¹` satisfies
//! `S·D = 𝓔·A·H`. Since `H` is orthonormal, `𝓔·A·H` obeys the same
//! concentration inequality as `𝓔·A`, so `S·D` inherits the restricted
//! isometry property of the random ensemble.
//!
//! The factorization is not unique. Three constructions are provided:
//!
//! * [`factor_spectral`]: matches the spectra of `AAᵀ` and `DDᵀ` through a
//!   diagonal rescaling, `W = Q_A Σ_S Q_Dᵀ`, `G = W⁻¹`,
//!   `H = A⁺WD + N_A N_Dᵀ`;
//! * [`factor_tight_frame`]: for Parseval frames, `G = O(AAᵀ)^{-1/2}` and
//!   `H = AᵀGᵀD + N_A N_Dᵀ`;
//! * [`factor_gram_schmidt`]: from orthonormal row-space bases `U`, `V` of
//!   `A`, `D`: `H = UVᵀ + U_⊥V_⊥ᵀ` and `G = (DV)^ (AU)^⁻¹`, where `^`
//!   extends an `l × k` block to an invertible `l × l` matrix.
//!
//! Every construction also returns `G⁻¹` in closed form (or from the same
//! inverse it needed anyway), so building a sensing matrix never inverts `G`
//! from scratch.

use crate::ensembles::{random_orthonormal, RowSelector};
use crate::error::{Error, Result};
use crate::linalg::{
    default_rank_tol, inv_sqrt_spd, inverse, orthogonal_complement, orthonormal_range_basis, pinv_from_svd, rank,
    spd_power, svd, Svd,
};
use crate::matrix::Matrix;

/// Tight-frame acceptance: `‖DDᵀ/c − P_D‖_max` above this is rejected.
pub const TIGHT_FRAME_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactorMethod {
    Spectral,
    TightFrame,
    GramSchmidt,
}

impl FactorMethod {
    pub const ALL: [FactorMethod; 3] = [
        FactorMethod::Spectral,
        FactorMethod::TightFrame,
        FactorMethod::GramSchmidt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FactorMethod::Spectral => "spectral",
            FactorMethod::TightFrame => "tight_frame",
            FactorMethod::GramSchmidt => "gram_schmidt",
        }
    }
}

impl std::str::FromStr for FactorMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(FactorMethod::Spectral),
            "tight_frame" | "tight-frame" => Ok(FactorMethod::TightFrame),
            "gram_schmidt" | "gram-schmidt" => Ok(FactorMethod::GramSchmidt),
            other => Err(Error::param(format!("unknown factorization method '{other}'"))),
        }
    }
}

/// `D = G·A·H` together with `G⁻¹` and provenance.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub g: Matrix,
    pub g_inv: Matrix,
    pub a: Matrix,
    pub h: Matrix,
    pub method: FactorMethod,
    pub rank: usize,
    /// Relative rank tolerance the factorization was built with.
    pub tol: f64,
    /// Tight-frame constant `c` with `DDᵀ = c·P_D`; 1 for the other methods.
    pub frame_scale: f64,
}

impl Factorization {
    /// `G⁻¹·D`, which equals `A·H`.
    pub fn embedded_dictionary(&self, d: &Matrix) -> Matrix {
        self.g_inv.matmul(d)
    }
}

/// Knobs shared by all constructions.
#[derive(Debug, Clone, Default)]
pub struct FactorOptions {
    /// Relative rank tolerance; defaults to [`default_rank_tol`] of `D`.
    pub tol: Option<f64>,
    /// Rotates the null-space completion by a seeded random orthonormal
    /// matrix, producing a different but equally valid `H`.
    pub completion_seed: Option<u64>,
    /// The orthonormal `O` of the tight-frame construction (identity when
    /// absent).
    pub orientation: Option<Matrix>,
}

impl FactorOptions {
    pub fn with_tol(tol: f64) -> Self {
        FactorOptions {
            tol: Some(tol),
            ..Default::default()
        }
    }
}

/// Numbers describing how well a factorization reproduces its dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationReport {
    /// `‖D − GAH‖_F / max(1, ‖D‖_F)`.
    pub residual_rel: f64,
    /// `‖HHᵀ − I‖_max`.
    pub h_orthonormality_err: f64,
    pub g_condition_number: f64,
    pub rank_d: usize,
    pub rank_a: usize,
}

impl ValidationReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.residual_rel <= tol && self.h_orthonormality_err <= tol && self.rank_d == self.rank_a
    }
}

/// Dispatches to the construction named by `method`.
pub fn factor(method: FactorMethod, d: &Matrix, a: &Matrix, opts: &FactorOptions) -> Result<Factorization> {
    match method {
        FactorMethod::Spectral => factor_spectral_with(d, a, opts),
        FactorMethod::TightFrame => factor_tight_frame_with(d, a, opts),
        FactorMethod::GramSchmidt => factor_gram_schmidt_with(d, a, opts),
    }
}

pub fn factor_spectral(d: &Matrix, a: &Matrix, tol: f64) -> Result<Factorization> {
    factor_spectral_with(d, a, &FactorOptions::with_tol(tol))
}

pub fn factor_tight_frame(d: &Matrix, a: &Matrix, o: Option<&Matrix>, tol: f64) -> Result<Factorization> {
    factor_tight_frame_with(
        d,
        a,
        &FactorOptions {
            tol: Some(tol),
            orientation: o.cloned(),
            completion_seed: None,
        },
    )
}

pub fn factor_gram_schmidt(d: &Matrix, a: &Matrix, tol: f64) -> Result<Factorization> {
    factor_gram_schmidt_with(d, a, &FactorOptions::with_tol(tol))
}

/// Shape and rank checks common to every construction. Returns the SVDs of
/// `A` and `D` and the shared rank.
struct Prepared {
    tol: f64,
    svd_a: Svd,
    svd_d: Svd,
    rank: usize,
}

fn prepare(d: &Matrix, a: &Matrix, opts: &FactorOptions) -> Result<Prepared> {
    if d.shape() != a.shape() {
        return Err(Error::dim(format!(
            "D is {}x{} but A is {}x{}",
            d.rows(),
            d.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let (l, n) = d.shape();
    if l == 0 || l > n {
        return Err(Error::dim(format!("need 1 <= l <= n, got {l}x{n}")));
    }
    let tol = opts.tol.unwrap_or_else(|| default_rank_tol(d));
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::param(format!("rank tolerance must lie in (0, 1), got {tol}")));
    }
    let svd_a = svd(a)?;
    let svd_d = svd(d)?;
    let rank_a = svd_a.rank(tol);
    let rank_d = svd_d.rank(tol);
    if rank_a != rank_d {
        return Err(Error::RankMismatch { rank_d, rank_a });
    }
    if rank_a == 0 {
        return Err(Error::param("A and D are both zero"));
    }
    for (name, s) in [("A", &svd_a), ("D", &svd_d)] {
        let cutoff = tol * s.sigma_max();
        let smallest_kept = s.s[rank_a - 1];
        if smallest_kept <= 10.0 * cutoff {
            return Err(Error::Numerical(format!(
                "rank of {name} is marginal at tolerance: sigma_{rank_a} = {smallest_kept:e}, cutoff {cutoff:e}"
            )));
        }
    }
    Ok(Prepared {
        tol,
        svd_a,
        svd_d,
        rank: rank_a,
    })
}

/// Seeded rotation of completion columns; identity when no seed is given.
fn rotate_completion(n: &Matrix, seed: Option<u64>) -> Result<Matrix> {
    match seed {
        Some(seed) if n.cols() > 0 => Ok(n.matmul(&random_orthonormal(n.cols(), seed)?)),
        _ => Ok(n.clone()),
    }
}

/// Orthonormal basis of the null space of a matrix from its right singular
/// vectors.
fn null_space(s: &Svd, k: usize) -> Matrix {
    orthogonal_complement(&s.v.leading_cols(k))
}

/// Spectral construction: `W = Q_A Σ_S Q_Dᵀ` with `Σ_A = Σ_S Σ_D Σ_S`,
/// `G = W⁻¹`, `H = A⁺WD + N_A N_Dᵀ`.
///
/// The spectral decompositions of `AAᵀ` and `DDᵀ` are read off the one-sided
/// Jacobi SVDs of `A` and `D` (`AAᵀ = U_A Σ_A² U_Aᵀ`), which keeps small
/// eigenvalues accurate. Entries of `Σ_S` past the rank are 1.
pub fn factor_spectral_with(d: &Matrix, a: &Matrix, opts: &FactorOptions) -> Result<Factorization> {
    let p = prepare(d, a, opts)?;
    let l = d.rows();
    let k = p.rank;

    // Σ_S,i = sqrt(λ_A,i / λ_D,i) = σ_A,i / σ_D,i on the shared support.
    let sigma_s: Vec<f64> = (0..l)
        .map(|i| if i < k { p.svd_a.s[i] / p.svd_d.s[i] } else { 1.0 })
        .collect();
    let sigma_s_inv: Vec<f64> = sigma_s.iter().map(|s| 1.0 / s).collect();
    let q_a = &p.svd_a.u;
    let q_d = &p.svd_d.u;
    let w = q_a.scale_cols(&sigma_s).matmul_t(q_d);
    let g = q_d.scale_cols(&sigma_s_inv).matmul_t(q_a);

    let a_pinv = pinv_from_svd(&p.svd_a, p.tol);
    let n_a = null_space(&p.svd_a, k);
    let n_d = rotate_completion(&null_space(&p.svd_d, k), opts.completion_seed)?;
    let h = a_pinv.matmul(&w).matmul(d).add(&n_a.matmul_t(&n_d));

    Ok(Factorization {
        g,
        g_inv: w,
        a: a.clone(),
        h,
        method: FactorMethod::Spectral,
        rank: k,
        tol: p.tol,
        frame_scale: 1.0,
    })
}

/// Tight-frame construction `G = O(AAᵀ)^{-1/2}`, `H = AᵀGᵀD + N_A N_Dᵀ`.
///
/// `D` must satisfy `DDᵀ = c·P_D` for an orthogonal projector `P_D` (for
/// full-rank `D`, `DDᵀ = c·I`); it is rescaled by `1/√c` internally and the
/// scale folded back into `G`. For rank-deficient inputs the inverses
/// become pseudo-inverses on the rank-`k` subspaces and `G` is completed to
/// an invertible matrix by mapping the complement of `range(A)` onto the
/// complement of `range(D)`; `O` must then be absent.
pub fn factor_tight_frame_with(d: &Matrix, a: &Matrix, opts: &FactorOptions) -> Result<Factorization> {
    let p = prepare(d, a, opts)?;
    let l = d.rows();
    let k = p.rank;

    let c = p.svd_d.s[..k].iter().map(|s| s * s).sum::<f64>() / k as f64;
    let u_dk = p.svd_d.u.leading_cols(k);
    let projector = u_dk.matmul_t(&u_dk);
    let deviation = d.gram_rows().scale(1.0 / c).sub(&projector).max_abs();
    if deviation > TIGHT_FRAME_TOL {
        return Err(Error::NotTightFrame { deviation });
    }
    let scale = c.sqrt();
    let d_unit = d.scale(1.0 / scale);

    let (g_unit, g_unit_inv) = if k == l {
        let gram = a.gram_rows();
        let r = inv_sqrt_spd(&gram)?;
        let r_inv = spd_power(&gram, 0.5)?;
        match &opts.orientation {
            None => (r, r_inv),
            Some(o) => {
                check_orthonormal(o, l)?;
                (o.matmul(&r), r_inv.matmul_t(o))
            }
        }
    } else {
        if opts.orientation.is_some() {
            return Err(Error::param(
                "an orientation O is only supported for full-rank tight frames",
            ));
        }
        let u_ak = p.svd_a.u.leading_cols(k);
        let u_a_perp = p.svd_a.u.trailing_cols(k);
        let u_d_perp = p.svd_d.u.trailing_cols(k);
        let s_inv: Vec<f64> = p.svd_a.s[..k].iter().map(|s| 1.0 / s).collect();
        let g = u_dk
            .scale_cols(&s_inv)
            .matmul_t(&u_ak)
            .add(&u_d_perp.matmul_t(&u_a_perp));
        let g_inv = u_ak
            .scale_cols(&p.svd_a.s[..k])
            .matmul_t(&u_dk)
            .add(&u_a_perp.matmul_t(&u_d_perp));
        (g, g_inv)
    };

    let n_a = null_space(&p.svd_a, k);
    let n_d = rotate_completion(&null_space(&p.svd_d, k), opts.completion_seed)?;
    // AᵀGᵀD = (G A)ᵀ D.
    let ga = g_unit.matmul(a);
    let h = ga.t_matmul(&d_unit).add(&n_a.matmul_t(&n_d));

    Ok(Factorization {
        g: g_unit.scale(scale),
        g_inv: g_unit_inv.scale(1.0 / scale),
        a: a.clone(),
        h,
        method: FactorMethod::TightFrame,
        rank: k,
        tol: p.tol,
        frame_scale: c,
    })
}

fn check_orthonormal(o: &Matrix, l: usize) -> Result<()> {
    if o.shape() != (l, l) {
        return Err(Error::dim(format!(
            "orientation must be {l}x{l}, got {}x{}",
            o.rows(),
            o.cols()
        )));
    }
    let dev = o.matmul_t(o).identity_deviation();
    if dev > 1e-10 {
        return Err(Error::param(format!(
            "orientation is not orthonormal (deviation {dev:e})"
        )));
    }
    Ok(())
}

/// Gram–Schmidt construction from row-space bases.
pub fn factor_gram_schmidt_with(d: &Matrix, a: &Matrix, opts: &FactorOptions) -> Result<Factorization> {
    let p = prepare(d, a, opts)?;
    let k = p.rank;

    // U, V: n × k with AUUᵀ = A and DVVᵀ = D.
    let u = orthonormal_range_basis(&a.transpose(), p.tol)?;
    let v = orthonormal_range_basis(&d.transpose(), p.tol)?;
    if u.cols() != k || v.cols() != k {
        return Err(Error::Numerical(format!(
            "Gram-Schmidt found row-space dimensions {} (A) and {} (D), singular values give {k}",
            u.cols(),
            v.cols()
        )));
    }
    let u_perp = orthogonal_complement(&u);
    let v_perp = rotate_completion(&orthogonal_complement(&v), opts.completion_seed)?;
    let h = u.matmul_t(&v).add(&u_perp.matmul_t(&v_perp));

    let dv_hat = extend_to_invertible(&d.matmul(&v), p.tol)?;
    let au_hat = extend_to_invertible(&a.matmul(&u), p.tol)?;
    let au_inv = inverse(&au_hat).map_err(|_| Error::Numerical("extended AU is singular".into()))?;
    let dv_inv = inverse(&dv_hat).map_err(|_| Error::Numerical("extended DV is singular".into()))?;

    Ok(Factorization {
        g: dv_hat.matmul(&au_inv),
        g_inv: au_hat.matmul(&dv_inv),
        a: a.clone(),
        h,
        method: FactorMethod::GramSchmidt,
        rank: k,
        tol: p.tol,
        frame_scale: 1.0,
    })
}

/// Appends to the `l × k` block `m` an orthonormal basis of the orthogonal
/// complement of its column space, scaled to the mean singular value of
/// `m`.
fn extend_to_invertible(m: &Matrix, tol: f64) -> Result<Matrix> {
    let (l, k) = m.shape();
    if k == l {
        return Ok(m.clone());
    }
    let basis = orthonormal_range_basis(m, tol)?;
    if basis.cols() != k {
        return Err(Error::Numerical(format!(
            "cannot extend a {l}x{k} block of column rank {} to an invertible matrix",
            basis.cols()
        )));
    }
    let sv = svd(m)?;
    let mean = sv.s.iter().sum::<f64>() / k as f64;
    Ok(m.hstack(&orthogonal_complement(&basis).scale(mean)))
}

/// Residuals, conditioning and ranks of a factorization of `d`.
pub fn validate(f: &Factorization, d: &Matrix) -> Result<ValidationReport> {
    let (l, n) = d.shape();
    if f.g.shape() != (l, l) || f.a.shape() != (l, n) || f.h.shape() != (n, n) {
        return Err(Error::dim("factorization shapes do not match the dictionary"));
    }
    let gah = f.g.matmul(&f.a).matmul(&f.h);
    let residual_rel = d.sub(&gah).frobenius_norm() / d.frobenius_norm().max(1.0);
    let h_orthonormality_err = f.h.gram_rows().identity_deviation();
    let sg = svd(&f.g)?;
    let smin = sg.s.last().copied().unwrap_or(0.0);
    let g_condition_number = if smin > 0.0 {
        sg.sigma_max() / smin
    } else {
        f64::INFINITY
    };
    Ok(ValidationReport {
        residual_rel,
        h_orthonormality_err,
        g_condition_number,
        rank_d: rank(d, f.tol)?,
        rank_a: rank(&f.a, f.tol)?,
    })
}

/// `‖W D Dᵀ Wᵀ − A Aᵀ‖_F / ‖A Aᵀ‖_F` with `W = G⁻¹`.
pub fn gram_equivalence_residual(f: &Factorization, d: &Matrix) -> f64 {
    let wd = f.g_inv.matmul(d);
    let aat = f.a.gram_rows();
    wd.gram_rows().sub(&aat).frobenius_norm() / aat.frobenius_norm().max(f64::MIN_POSITIVE)
}

/// `S = 𝓔·G⁻¹`, the `m × l` sensing matrix for the factored dictionary.
pub fn sensing_matrix(f: &Factorization, e: &RowSelector) -> Result<Matrix> {
    let l = f.g.rows();
    if e.l() != l {
        return Err(Error::dim(format!(
            "selector chooses from {} rows but G is {l}x{l}",
            e.l()
        )));
    }
    let sg = svd(&f.g)?;
    let smin = sg.s.last().copied().unwrap_or(0.0);
    if smin <= f.tol * sg.sigma_max() {
        return Err(Error::Singular { eigenvalue: smin });
    }
    Ok(f.g_inv.select_rows(e.indices()))
}

/// `‖S·D − 𝓔·A·H‖_F / ‖D‖_F`: both sides of `SD = 𝓔AH`, computed
/// independently.
pub fn embedding_gap(f: &Factorization, d: &Matrix, e: &RowSelector) -> Result<f64> {
    let sd = sensing_matrix(f, e)?.matmul(d);
    let eah = f.a.select_rows(e.indices()).matmul(&f.h);
    Ok(sd.sub(&eah).frobenius_norm() / d.frobenius_norm().max(f64::MIN_POSITIVE))
}
