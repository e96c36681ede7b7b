//! Builds the undecimated CDF 9/7 dictionary and checks its frame properties.

use dictsense::dictionary::{cdf97_filters, frame_diagnostics, parseval_frame, wavelet_dictionary, WaveletSpec};
use dictsense::ensembles::SampleStream;

fn main() -> dictsense::Result<()> {
    let bank = cdf97_filters();
    let mut s = SampleStream::new(3);
    let x: Vec<f64> = (0..64).map(|_| s.standard_normal()).collect();
    let (lo, hi) = bank.analyze(&x)?;
    let y = bank.synthesize(&lo, &hi)?;
    let err = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("one-level perfect reconstruction error {err:.2e}");

    let spec = WaveletSpec::new(128, 1024, 5, 1);
    let d = wavelet_dictionary(&spec)?;
    let diag = frame_diagnostics(&d)?;
    println!(
        "D {}x{}: {} wavelet columns, rank {}, tight-frame error {:.3}, column norm deviation {:.1e}",
        d.rows(),
        d.cols(),
        spec.wavelet_cols(),
        diag.rank,
        diag.tight_frame_err,
        diag.column_norm_max_dev
    );

    let p = parseval_frame(&d)?;
    println!(
        "Parseval version: tight-frame error {:.1e}",
        frame_diagnostics(&p)?.tight_frame_err
    );
    Ok(())
}
