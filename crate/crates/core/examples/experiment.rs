//! Runs a small success-probability curve and writes CSV and SVG next to it.
//!
//! `cargo run --release --example experiment -- [out-dir]`

use std::path::PathBuf;

use dictsense::bench::{run_curve, write_csv, write_svgs, ExperimentConfig};

fn main() -> dictsense::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let mut config = ExperimentConfig::preset("desk-wavelet-gaussian")?;
    config.k_list = vec![4];
    config.grid_points = 6;
    config.trials = 100;

    let result = run_curve(&config)?;
    for p in &result.points {
        let show = |v: Option<f64>| v.map_or("  -  ".to_string(), |v| format!("{v:.3}"));
        println!(
            "k={} m={:>2}  ours {}  benchmark {}",
            p.k,
            p.m,
            show(p.ours.probability()),
            show(p.benchmark.probability())
        );
    }
    println!("max |SD - EAH| over the run {:.1e}", result.max_embedding_gap);
    write_csv(dir.join("curve.csv"), &result)?;
    for path in write_svgs(&result, &dir.join("curve.svg"))? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
