//! Turns a factorization into sensing matrices S = E G^-1 and checks S D = E A H.

use dictsense::dictionary::{wavelet_dictionary, WaveletSpec};
use dictsense::ensembles::{row_selector, EnsembleKind, EnsembleSpec};
use dictsense::factorize::{embedding_gap, factor_spectral, sensing_matrix};
use dictsense::linalg::default_rank_tol;

fn main() -> dictsense::Result<()> {
    let d = wavelet_dictionary(&WaveletSpec::new(64, 256, 3, 5))?;
    let a = EnsembleSpec::new(EnsembleKind::Bernoulli, 64, 256, 6).sample()?;
    let f = factor_spectral(&d, &a, default_rank_tol(&d))?;
    for (i, m) in [8, 24, 40, 64].into_iter().enumerate() {
        let e = row_selector(m, 64, i as u64)?;
        let s = sensing_matrix(&f, &e)?;
        println!(
            "m = {m:>2}: S is {}x{}, |SD - EAH| / |D| = {:.2e}",
            s.rows(),
            s.cols(),
            embedding_gap(&f, &d, &e)?
        );
    }
    Ok(())
}
