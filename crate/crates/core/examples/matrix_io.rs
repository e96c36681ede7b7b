//! Writes a matrix in the binary and CSV formats and reads it back.

use dictsense::dictionary::{load_matrix, save_matrix};
use dictsense::ensembles::{EnsembleKind, EnsembleSpec};

fn main() -> dictsense::Result<()> {
    let dir = std::env::temp_dir().join("dictsense-io-example");
    std::fs::create_dir_all(&dir)?;
    let a = EnsembleSpec::new(EnsembleKind::Gaussian, 16, 48, 3).sample()?;
    for name in ["a.csmx", "a.csv"] {
        let path = dir.join(name);
        save_matrix(&path, &a)?;
        let back = load_matrix(&path)?;
        let bytes = std::fs::metadata(&path)?.len();
        println!("{name:<7} {bytes:>6} bytes, identical after reload: {}", back == a);
    }

    std::fs::write(dir.join("broken.csmx"), b"CSMX\x01\x00\x00\x00")?;
    match load_matrix(dir.join("broken.csmx")) {
        Ok(_) => println!("unexpected: truncated file loaded"),
        Err(e) => println!("truncated file rejected: {e}"),
    }
    Ok(())
}
