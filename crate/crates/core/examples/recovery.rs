//! Recovers a sparse vector from random measurements with CoSaMP.

use dictsense::cosamp::{cosamp, recovery_success, RecoveryProblem};
use dictsense::ensembles::{sparse_vector, EnsembleKind, EnsembleSpec};

fn main() -> dictsense::Result<()> {
    let (m, n, k) = (64, 256, 5);
    let phi = EnsembleSpec::new(EnsembleKind::Gaussian, m, n, 1).sample()?;
    let x = sparse_vector(n, k, 2)?;
    let z = phi.mul_vec(&x.to_dense());

    let out = cosamp(&RecoveryProblem::new(&phi, &z, k))?;
    let err: f64 = out
        .x_hat
        .iter()
        .zip(x.to_dense())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    println!("true support {:?}", x.support());
    println!(
        "{} iterations, converged {}, residual {:.1e}, error {err:.1e}, success {}",
        out.iterations,
        out.converged,
        out.final_residual,
        recovery_success(&out.x_hat, &x.to_dense(), n)
    );
    Ok(())
}
