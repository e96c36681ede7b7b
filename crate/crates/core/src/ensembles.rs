//! Seeded random objects: Gaussian/Bernoulli matrices, the row selector and
//! sparse test vectors.
//!
//! All randomness comes from xoshiro256** seeded through SplitMix64
//! (`rand_xoshiro::Xoshiro256StarStar::seed_from_u64`), both of which have
//! published reference implementations. On top of the raw `u64` stream:
//!
//! * uniform `[0, 1)`: top 53 bits of `next_u64` times `2⁻⁵³`;
//! * standard normal: Box–Muller, both outputs used, cosine branch first;
//! * uniform integer in `[0, b)`: `next_u64 % b` after rejecting the
//!   biased tail of the `u64` range.
//!
//! Trial seeds come from [`derive_seed`], so independent trials never share a
//! stream.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use crate::error::{Error, Result};
use crate::linalg::orthonormal_range_basis;
use crate::matrix::Matrix;

/// Deterministic sample stream used across the crate.
pub struct SampleStream {
    rng: Xoshiro256StarStar,
    spare_normal: Option<f64>,
}

impl SampleStream {
    pub fn new(seed: u64) -> Self {
        SampleStream {
            rng: Xoshiro256StarStar::seed_from_u64(seed),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u lies in (0, 1], so the log is finite.
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `hash64(base_seed, index, tag)`: the seed for stream `tag` of trial
/// `index`.
pub fn derive_seed(base_seed: u64, index: u64, tag: u64) -> u64 {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
    let a = mix64(base_seed ^ tag.wrapping_mul(GOLDEN));
    mix64(a.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
}

/// Stream tags used by the experiment harness.
pub mod tags {
    pub const ENSEMBLE: u64 = 1;
    pub const DICTIONARY: u64 = 2;
    pub const SPARSE_VECTOR: u64 = 3;
    pub const SELECTOR: u64 = 4;
    pub const PROBE: u64 = 5;
    pub const COMPLETION: u64 = 6;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnsembleKind {
    Gaussian,
    Bernoulli,
}

impl EnsembleKind {
    pub fn name(self) -> &'static str {
        match self {
            EnsembleKind::Gaussian => "gaussian",
            EnsembleKind::Bernoulli => "bernoulli",
        }
    }
}

impl std::str::FromStr for EnsembleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(EnsembleKind::Gaussian),
            "bernoulli" => Ok(EnsembleKind::Bernoulli),
            other => Err(Error::param(format!("unknown ensemble kind '{other}'"))),
        }
    }
}

/// Shape and seed of a random `A ∈ ℝ^{rows × cols}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleSpec {
    pub kind: EnsembleKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(kind: EnsembleKind, rows: usize, cols: usize, seed: u64) -> Self {
        EnsembleSpec { kind, rows, cols, seed }
    }

    /// Draws the matrix described by this spec.
    pub fn sample(&self) -> Result<Matrix> {
        match self.kind {
            EnsembleKind::Gaussian => gaussian_matrix(self),
            EnsembleKind::Bernoulli => bernoulli_matrix(self),
        }
    }

    fn check(&self, kind: EnsembleKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::param(format!(
                "spec is {} but {} was requested",
                self.kind.name(),
                kind.name()
            )));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::dim(format!(
                "ensemble dimensions must be positive, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// i.i.d. `N(0, 1/cols)` entries, filled row-major.
pub fn gaussian_matrix(spec: &EnsembleSpec) -> Result<Matrix> {
    spec.check(EnsembleKind::Gaussian)?;
    let sd = 1.0 / (spec.cols as f64).sqrt();
    let mut stream = SampleStream::new(spec.seed);
    Ok(Matrix::from_fn(spec.rows, spec.cols, |_, _| {
        sd * stream.standard_normal()
    }))
}

/// Entries `±1/√cols` with equal probability; the sign is the top bit of
/// each `u64` draw.
pub fn bernoulli_matrix(spec: &EnsembleSpec) -> Result<Matrix> {
    spec.check(EnsembleKind::Bernoulli)?;
    let v = 1.0 / (spec.cols as f64).sqrt();
    let mut stream = SampleStream::new(spec.seed);
    Ok(Matrix::from_fn(spec.rows, spec.cols, |_, _| {
        if stream.next_u64() >> 63 == 1 {
            v
        } else {
            -v
        }
    }))
}

/// The row-selection operator: `m` distinct rows out of `l`, in draw order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowSelector {
    l: usize,
    indices: Vec<usize>,
}

impl RowSelector {
    /// Selector with explicit indices; they must be distinct and below `l`.
    pub fn from_indices(l: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() || indices.len() > l {
            return Err(Error::param(format!(
                "selector needs 1..={l} indices, got {}",
                indices.len()
            )));
        }
        let mut seen = vec![false; l];
        for &i in &indices {
            if i >= l || seen[i] {
                return Err(Error::param(format!("selector index {i} out of range or repeated")));
            }
            seen[i] = true;
        }
        Ok(RowSelector { l, indices })
    }

    /// Selects every row in natural order.
    pub fn full(l: usize) -> Self {
        RowSelector {
            l,
            indices: (0..l).collect(),
        }
    }

    pub fn m(&self) -> usize {
        self.indices.len()
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| v[i]).collect()
    }
}

/// Uniform random `m`-subset of `[0, l)` by partial Fisher–Yates.
pub fn row_selector(m: usize, l: usize, seed: u64) -> Result<RowSelector> {
    if m == 0 || m > l {
        return Err(Error::param(format!(
            "row selector needs 1 <= m <= l, got m={m}, l={l}"
        )));
    }
    let mut stream = SampleStream::new(seed);
    let mut pool: Vec<usize> = (0..l).collect();
    for i in 0..m {
        let j = i + stream.below((l - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(m);
    Ok(RowSelector { l, indices: pool })
}

/// `𝓔 · m`: row `i` of the result is row `indices[i]` of `m`.
pub fn apply_selector(e: &RowSelector, m: &Matrix) -> Result<Matrix> {
    if m.rows() != e.l {
        return Err(Error::dim(format!(
            "selector over {} rows applied to a matrix with {} rows",
            e.l,
            m.rows()
        )));
    }
    Ok(m.select_rows(&e.indices))
}

/// Exactly `k`-sparse vector of length `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector {
    n: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseVector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }
}

/// Support uniform over `k`-subsets of `[0, n)` (sorted), values uniform on
/// `[-1, 1]` with exact zeros redrawn.
pub fn sparse_vector(n: usize, k: usize, seed: u64) -> Result<SparseVector> {
    if k == 0 || k > n {
        return Err(Error::param(format!(
            "sparse vector needs 1 <= k <= n, got k={k}, n={n}"
        )));
    }
    let mut stream = SampleStream::new(seed);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + stream.below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut support = pool[..k].to_vec();
    support.sort_unstable();
    let values = (0..k)
        .map(|_| loop {
            let v = stream.uniform_in(-1.0, 1.0);
            if v != 0.0 {
                break v;
            }
        })
        .collect();
    Ok(SparseVector { n, support, values })
}

/// Random orthonormal `n × n` matrix (Gram–Schmidt of a Gaussian matrix).
pub fn random_orthonormal(n: usize, seed: u64) -> Result<Matrix> {
    random_tight_frame(n, n, seed)
}

/// `l × n` matrix with orthonormal rows, i.e. a Parseval frame
/// (`DDᵀ = I_l`): the first `l` rows of a random orthonormal matrix.
pub fn random_tight_frame(l: usize, n: usize, seed: u64) -> Result<Matrix> {
    if l == 0 || l > n {
        return Err(Error::param(format!("tight frame needs 1 <= l <= n, got {l}x{n}")));
    }
    let mut stream = SampleStream::new(seed);
    let g = Matrix::from_fn(n, l, |_, _| stream.standard_normal());
    let q = orthonormal_range_basis(&g, 1e-10)?;
    if q.cols() != l {
        return Err(Error::Numerical("degenerate Gaussian draw".into()));
    }
    Ok(q.transpose())
}

/// Random unit vector in `ℝⁿ`.
pub fn unit_vector(n: usize, stream: &mut SampleStream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| stream.standard_normal()).collect();
        let norm = crate::matrix::norm2(&v);
        if norm > 0.0 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}
