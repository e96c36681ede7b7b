//! Factors a dictionary as D = G A H with each construction and validates it.

use dictsense::dictionary::{parseval_frame, wavelet_dictionary, WaveletSpec};
use dictsense::ensembles::{EnsembleKind, EnsembleSpec};
use dictsense::factorize::{factor, validate, FactorMethod, FactorOptions};

fn main() -> dictsense::Result<()> {
    let d = wavelet_dictionary(&WaveletSpec::new(64, 256, 3, 11))?;
    let a = EnsembleSpec::new(EnsembleKind::Gaussian, 64, 256, 12).sample()?;
    for method in FactorMethod::ALL {
        // tight_frame needs a tight dictionary
        let d = if method == FactorMethod::TightFrame {
            parseval_frame(&d)?
        } else {
            d.clone()
        };
        let f = factor(method, &d, &a, &FactorOptions::default())?;
        let r = validate(&f, &d)?;
        println!(
            "{:<13} rank {}  residual {:.2e}  |HH'-I| {:.2e}  cond(G) {:.2e}",
            method.name(),
            f.rank,
            r.residual_rel,
            r.h_orthonormality_err,
            r.g_condition_number
        );
    }
    Ok(())
}
