//! Empirical concentration and restricted-isometry probes.

use dictsense::bench::{concentration_probe, rip_probe};
use dictsense::ensembles::{row_selector, EnsembleKind, EnsembleSpec};

fn main() -> dictsense::Result<()> {
    for kind in [EnsembleKind::Gaussian, EnsembleKind::Bernoulli] {
        let spec = EnsembleSpec::new(kind, 128, 1024, 9);
        let c = concentration_probe(&spec, 64, 2000, 10)?;
        println!(
            "{:<9} concentration: mean {:.4}, max deviation {:.3}",
            kind.name(),
            c.mean,
            c.max_deviation
        );

        let a = spec.sample()?;
        let phi = a.select_rows(row_selector(96, 128, 11)?.indices());
        for k in [4, 10] {
            let r = rip_probe(&phi, k, 1000, 12)?;
            println!(
                "          k = {k:>2}: delta_hat {:.3}, mean ratio {:.4}",
                r.delta_hat, r.ratio_mean
            );
        }
    }
    Ok(())
}
