//! Wavelet sparsifying dictionary, frame diagnostics and matrix files.

pub mod io;
pub mod wavelet;

pub use io::{load_matrix, read_csv, read_matrix, save_matrix, write_csv, write_matrix};
pub use wavelet::{
    cdf97_filters, frame_diagnostics, parseval_frame, wavelet_atom, wavelet_dictionary, Cdf97, Filter,
    FrameDiagnostics, WaveletSpec,
};
