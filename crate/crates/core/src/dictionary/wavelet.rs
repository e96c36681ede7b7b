//! CDF 9/7 filter bank and the undecimated wavelet dictionary built from it.

use crate::ensembles::{gaussian_matrix, EnsembleKind, EnsembleSpec};
use crate::error::{Error, Result};
use crate::linalg::{default_rank_tol, inv_sqrt_spd, rank};
use crate::matrix::{norm2, Matrix};

/// FIR filter with taps at indices `offset, offset + 1, …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Filter {
    pub taps: &'static [f64],
    pub offset: isize,
}

impl Filter {
    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    fn iter(&self) -> impl Iterator<Item = (isize, f64)> + '_ {
        self.taps
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.offset + i as isize, c))
    }
}

/// The four filters of the Cohen–Daubechies–Feauveau 9/7 biorthogonal bank,
/// normalized so both lowpass filters sum to √2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cdf97 {
    pub analysis_low: Filter,
    pub analysis_high: Filter,
    pub synthesis_low: Filter,
    pub synthesis_high: Filter,
}

// Computed to 20 digits from the spectral factorization of the degree-4
// Daubechies polynomial (1 + 4y + 10y² + 20y³, y = sin²(ω/2)): the real root
// goes to the 7-tap filter, the complex pair to the 9-tap filter.
const H9: [f64; 9] = [
    0.037_828_455_506_995_461,
    -0.023_849_465_019_380_002,
    -0.110_624_404_418_423_41,
    0.377_402_855_612_653_76,
    0.852_698_679_009_403_42,
    0.377_402_855_612_653_76,
    -0.110_624_404_418_423_41,
    -0.023_849_465_019_380_002,
    0.037_828_455_506_995_461,
];
const G7: [f64; 7] = [
    -0.064_538_882_628_938_439,
    -0.040_689_417_609_558_437,
    0.418_092_273_222_212_20,
    0.788_485_616_405_664_40,
    0.418_092_273_222_212_20,
    -0.040_689_417_609_558_437,
    -0.064_538_882_628_938_439,
];
// Highpass filters by alternating flip: g̃[n] = (−1)ⁿ g[1 − n], g[n] = (−1)ⁿ h̃[1 − n].
const H7_HIGH: [f64; 7] = [
    -0.064_538_882_628_938_439,
    0.040_689_417_609_558_437,
    0.418_092_273_222_212_20,
    -0.788_485_616_405_664_40,
    0.418_092_273_222_212_20,
    0.040_689_417_609_558_437,
    -0.064_538_882_628_938_439,
];
const G9_HIGH: [f64; 9] = [
    -0.037_828_455_506_995_461,
    -0.023_849_465_019_380_002,
    0.110_624_404_418_423_41,
    0.377_402_855_612_653_76,
    -0.852_698_679_009_403_42,
    0.377_402_855_612_653_76,
    0.110_624_404_418_423_41,
    -0.023_849_465_019_380_002,
    -0.037_828_455_506_995_461,
];

pub fn cdf97_filters() -> Cdf97 {
    Cdf97 {
        analysis_low: Filter { taps: &H9, offset: -4 },
        analysis_high: Filter {
            taps: &H7_HIGH,
            offset: -2,
        },
        synthesis_low: Filter { taps: &G7, offset: -3 },
        synthesis_high: Filter {
            taps: &G9_HIGH,
            offset: -3,
        },
    }
}

fn wrap(i: isize, len: usize) -> usize {
    i.rem_euclid(len as isize) as usize
}

impl Cdf97 {
    /// One level of periodic analysis: `(lowpass, highpass)` halves.
    pub fn analyze(&self, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let len = x.len();
        if len == 0 || !len.is_multiple_of(2) {
            return Err(Error::param(format!(
                "analysis needs an even, nonzero length, got {len}"
            )));
        }
        let half = len / 2;
        let mut low = vec![0.0; half];
        let mut high = vec![0.0; half];
        for n in 0..half {
            let base = 2 * n as isize;
            low[n] = self.analysis_low.iter().map(|(k, c)| c * x[wrap(base + k, len)]).sum();
            high[n] = self.analysis_high.iter().map(|(k, c)| c * x[wrap(base + k, len)]).sum();
        }
        Ok((low, high))
    }

    /// Inverse of [`Cdf97::analyze`].
    pub fn synthesize(&self, low: &[f64], high: &[f64]) -> Result<Vec<f64>> {
        if low.len() != high.len() || low.is_empty() {
            return Err(Error::dim(format!(
                "synthesis needs equal nonempty halves, got {} and {}",
                low.len(),
                high.len()
            )));
        }
        let len = 2 * low.len();
        let mut x = vec![0.0; len];
        for n in 0..low.len() {
            let base = 2 * n as isize;
            for (k, c) in self.synthesis_low.iter() {
                x[wrap(base + k, len)] += c * low[n];
            }
            for (k, c) in self.synthesis_high.iter() {
                x[wrap(base + k, len)] += c * high[n];
            }
        }
        Ok(x)
    }
}

/// Circular convolution of `signal` with `filter` upsampled by `step`:
/// `out[t] = Σ_k c_k · signal[t − k·step]`.
fn circular_upsampled_conv(signal: &[f64], filter: &Filter, step: usize) -> Vec<f64> {
    let len = signal.len();
    let mut out = vec![0.0; len];
    for (k, c) in filter.iter() {
        let shift = k * step as isize;
        for (t, o) in out.iter_mut().enumerate() {
            *o += c * signal[wrap(t as isize - shift, len)];
        }
    }
    out
}

/// Level-`level` synthesis wavelet of the undecimated (à trous) transform
/// on a periodic signal of length `len`, anchored at sample 0.
pub fn wavelet_atom(level: usize, len: usize) -> Vec<f64> {
    let bank = cdf97_filters();
    let mut atom = vec![0.0; len];
    atom[0] = 1.0;
    atom = circular_upsampled_conv(&atom, &bank.synthesis_high, 1 << (level - 1));
    for j in (1..level).rev() {
        atom = circular_upsampled_conv(&atom, &bank.synthesis_low, 1 << (j - 1));
    }
    atom
}

/// Shape of the wavelet dictionary: `levels · signal_len` shift-invariant
/// wavelet columns followed by Gaussian columns up to `total_cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaveletSpec {
    pub signal_len: usize,
    pub total_cols: usize,
    pub levels: usize,
    pub seed: u64,
}

impl WaveletSpec {
    pub fn new(signal_len: usize, total_cols: usize, levels: usize, seed: u64) -> Self {
        WaveletSpec {
            signal_len,
            total_cols,
            levels,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.signal_len;
        if l < 2 || !l.is_power_of_two() {
            return Err(Error::param(format!(
                "signal length must be a power of two >= 2, got {l}"
            )));
        }
        if self.levels == 0 || self.levels >= usize::BITS as usize || (1usize << self.levels) > l {
            return Err(Error::param(format!(
                "levels must satisfy 1 <= levels and 2^levels <= {l}, got {}",
                self.levels
            )));
        }
        if self.levels * l > self.total_cols {
            return Err(Error::param(format!(
                "{} levels of {l} columns exceed {} total columns",
                self.levels, self.total_cols
            )));
        }
        Ok(())
    }

    pub fn wavelet_cols(&self) -> usize {
        self.levels * self.signal_len
    }
}

/// Builds the `signal_len × total_cols` wavelet dictionary with unit-norm
/// columns. Column `(j − 1)·l + s` is the level-`j` atom circularly shifted
/// by `s`.
pub fn wavelet_dictionary(spec: &WaveletSpec) -> Result<Matrix> {
    spec.validate()?;
    let l = spec.signal_len;
    let mut d = Matrix::zeros(l, spec.total_cols);
    // Each atom is normalized once before shifting so every shift of it
    // holds bitwise-identical values.
    for level in 1..=spec.levels {
        let atom = unit(wavelet_atom(level, l), level - 1)?;
        for s in 0..l {
            let col = (level - 1) * l + s;
            for t in 0..l {
                d[(t, col)] = atom[wrap(t as isize - s as isize, l)];
            }
        }
    }
    let tail = spec.total_cols - spec.wavelet_cols();
    if tail > 0 {
        let g = gaussian_matrix(&EnsembleSpec::new(EnsembleKind::Gaussian, l, tail, spec.seed))?;
        for j in 0..tail {
            let col = unit(g.col(j), spec.wavelet_cols() + j)?;
            d.set_col(spec.wavelet_cols() + j, &col);
        }
    }
    Ok(d)
}

fn unit(v: Vec<f64>, col: usize) -> Result<Vec<f64>> {
    let n = norm2(&v);
    if n == 0.0 {
        return Err(Error::Numerical(format!("dictionary column {col} is zero")));
    }
    Ok(v.into_iter().map(|x| x / n).collect())
}

/// How far a dictionary is from a tight frame with unit-norm atoms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDiagnostics {
    /// `‖DDᵀ/c* − I‖_max` with `c* = trace(DDᵀ)/l`.
    pub tight_frame_err: f64,
    /// `max_j |‖d_j‖₂ − 1|`.
    pub column_norm_max_dev: f64,
    pub rank: usize,
}

pub fn frame_diagnostics(d: &Matrix) -> Result<FrameDiagnostics> {
    let gram = d.gram_rows();
    let c = gram.trace() / d.rows().max(1) as f64;
    let tight_frame_err = if c > 0.0 {
        gram.scale(1.0 / c).identity_deviation()
    } else {
        1.0
    };
    let column_norm_max_dev = d.column_norms().iter().fold(0.0f64, |m, n| m.max((n - 1.0).abs()));
    let rank = if d.rows() == 0 || d.cols() == 0 {
        0
    } else {
        rank(d, default_rank_tol(d))?
    };
    Ok(FrameDiagnostics {
        tight_frame_err,
        column_norm_max_dev,
        rank,
    })
}

/// Canonical Parseval frame of a full-row-rank dictionary:
/// `(DDᵀ)^{-1/2} D`, which satisfies `DDᵀ = I`.
pub fn parseval_frame(d: &Matrix) -> Result<Matrix> {
    Ok(inv_sqrt_spd(&d.gram_rows())?.matmul(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::SampleStream;

    #[test]
    fn lowpass_dc_gain() {
        let bank = cdf97_filters();
        let root2 = std::f64::consts::SQRT_2;
        assert!((bank.analysis_low.sum() - root2).abs() <= 1e-10);
        assert!((bank.synthesis_low.sum() - root2).abs() <= 1e-10);
        assert!(bank.analysis_high.sum().abs() <= 1e-10);
        assert!(bank.synthesis_high.sum().abs() <= 1e-10);
    }

    #[test]
    fn perfect_reconstruction_random_signal() {
        let bank = cdf97_filters();
        let mut stream = SampleStream::new(64);
        let x: Vec<f64> = (0..64).map(|_| stream.standard_normal()).collect();
        let (lo, hi) = bank.analyze(&x).unwrap();
        let y = bank.synthesize(&lo, &hi).unwrap();
        let err = x.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err <= 1e-10, "{err:e}");
    }

    #[test]
    fn perfect_reconstruction_impulse() {
        let bank = cdf97_filters();
        let mut x = vec![0.0; 16];
        x[0] = 1.0;
        let (lo, hi) = bank.analyze(&x).unwrap();
        let y = bank.synthesize(&lo, &hi).unwrap();
        assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-12));
        assert!(bank.analyze(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(WaveletSpec::new(128, 1024, 5, 0).validate().is_ok());
        assert!(WaveletSpec::new(100, 1024, 5, 0).validate().is_err());
        assert!(WaveletSpec::new(128, 600, 5, 0).validate().is_err());
        assert!(WaveletSpec::new(16, 64, 5, 0).validate().is_err());
        assert!(WaveletSpec::new(16, 64, 0, 0).validate().is_err());
    }

    #[test]
    fn single_level_shift_structure() {
        let d = wavelet_dictionary(&WaveletSpec::new(8, 16, 1, 3)).unwrap();
        for c in 0..7 {
            for t in 0..8 {
                assert_eq!(d[((t + 1) % 8, c + 1)], d[(t, c)]);
            }
        }
    }

    #[test]
    fn frame_diagnostics_examples() {
        let f = crate::ensembles::random_tight_frame(6, 20, 5).unwrap().scale(0.5);
        let diag = frame_diagnostics(&f).unwrap();
        assert!(diag.tight_frame_err <= 1e-10);
        assert_eq!(diag.rank, 6);

        let padded = Matrix::identity(4).hstack(&Matrix::zeros(4, 3));
        let diag = frame_diagnostics(&padded).unwrap();
        assert_eq!(diag.column_norm_max_dev, 1.0);
        assert_eq!(diag.tight_frame_err, 0.0);
    }

    #[test]
    fn parseval_frame_is_tight() {
        let d = wavelet_dictionary(&WaveletSpec::new(16, 64, 2, 9)).unwrap();
        let p = parseval_frame(&d).unwrap();
        assert!(p.gram_rows().identity_deviation() <= 1e-10);
    }
}
