//! Seeded Gaussian and Bernoulli ensembles, row selectors and sparse draws.

use dictsense::ensembles::tags::SPARSE_VECTOR;
use dictsense::ensembles::{derive_seed, row_selector, sparse_vector, EnsembleKind, EnsembleSpec};

fn main() -> dictsense::Result<()> {
    for kind in [EnsembleKind::Gaussian, EnsembleKind::Bernoulli] {
        let a = EnsembleSpec::new(kind, 128, 1024, 42).sample()?;
        let norms = a.column_norms();
        let mean_sq = norms.iter().map(|c| c * c).sum::<f64>() / norms.len() as f64;
        println!("{:<9} 128x1024  mean squared column norm {mean_sq:.4}", kind.name());
    }

    let e = row_selector(8, 32, 7)?;
    println!("row selector picks {:?}", e.indices());

    // one stream per trial, derived from a base seed
    for t in 0..3 {
        let x = sparse_vector(64, 3, derive_seed(7, t, SPARSE_VECTOR))?;
        println!("trial {t}: support {:?}", x.support());
    }
    Ok(())
}
