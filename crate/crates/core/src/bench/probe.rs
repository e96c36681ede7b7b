use crate::ensembles::{derive_seed, row_selector, sparse_vector, tags, unit_vector, EnsembleSpec, SampleStream};
use crate::error::{Error, Result};
use crate::matrix::{norm2, Matrix};

/// Empirical restricted-isometry witness: a lower bound on `δ_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RipProbeResult {
    pub k: usize,
    pub samples: usize,
    /// `max |‖Φ̃x‖² / ‖x‖² − 1|` over the sampled vectors.
    pub delta_hat: f64,
    pub ratio_mean: f64,
}

/// Probes `Φ̃ = √(n/m)·Φ` with `samples` seeded `k`-sparse unit vectors.
pub fn rip_probe(phi: &Matrix, k: usize, samples: usize, seed: u64) -> Result<RipProbeResult> {
    let (m, n) = phi.shape();
    if k == 0 || k > n || samples == 0 || m == 0 {
        return Err(Error::param(format!(
            "rip probe needs 1 <= k <= n and samples >= 1, got k={k}, n={n}, samples={samples}"
        )));
    }
    let scale = n as f64 / m as f64;
    let mut delta_hat = 0.0f64;
    let mut sum = 0.0;
    for s in 0..samples {
        let v = sparse_vector(n, k, derive_seed(seed, s as u64, tags::PROBE))?;
        let norm = norm2(v.values());
        let mut y = vec![0.0; m];
        for (i, yi) in y.iter_mut().enumerate() {
            let row = phi.row(i);
            *yi = v
                .support()
                .iter()
                .zip(v.values())
                .map(|(&j, c)| row[j] * c)
                .sum::<f64>()
                / norm;
        }
        let ratio = scale * y.iter().map(|t| t * t).sum::<f64>();
        delta_hat = delta_hat.max((ratio - 1.0).abs());
        sum += ratio;
    }
    Ok(RipProbeResult {
        k,
        samples,
        delta_hat,
        ratio_mean: sum / samples as f64,
    })
}

/// Summary of `‖𝓔Ax‖²·(n/m)` over random unit vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcentrationSummary {
    pub samples: usize,
    pub mean: f64,
    /// `max |ratio − 1|`.
    pub max_deviation: f64,
}

/// Concentration of `A` under a fresh random `m`-row selection per vector.
pub fn concentration_probe_matrix(a: &Matrix, m: usize, num_vectors: usize, seed: u64) -> Result<ConcentrationSummary> {
    let (l, n) = a.shape();
    if m == 0 || m > l || num_vectors == 0 {
        return Err(Error::param(format!(
            "concentration probe needs 1 <= m <= {l} and at least one vector, got m={m}"
        )));
    }
    let scale = n as f64 / m as f64;
    let mut stream = SampleStream::new(derive_seed(seed, 0, tags::PROBE));
    let mut sum = 0.0;
    let mut max_deviation = 0.0f64;
    for i in 0..num_vectors {
        let x = unit_vector(n, &mut stream);
        let e = row_selector(m, l, derive_seed(seed, i as u64, tags::SELECTOR))?;
        let ratio = scale
            * e.indices()
                .iter()
                .map(|&r| {
                    let v: f64 = a.row(r).iter().zip(&x).map(|(p, q)| p * q).sum();
                    v * v
                })
                .sum::<f64>();
        sum += ratio;
        max_deviation = max_deviation.max((ratio - 1.0).abs());
    }
    Ok(ConcentrationSummary {
        samples: num_vectors,
        mean: sum / num_vectors as f64,
        max_deviation,
    })
}

pub fn concentration_probe(
    ensemble: &EnsembleSpec,
    m: usize,
    num_vectors: usize,
    seed: u64,
) -> Result<ConcentrationSummary> {
    concentration_probe_matrix(&ensemble.sample()?, m, num_vectors, seed)
}
