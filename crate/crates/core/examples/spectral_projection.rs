//! Projection of Hermitian matrices onto spectral sets: the eigenvalues are
//! projected as a vector and the eigenvectors kept.
//!
//! ```bash
//! cargo run --example spectral_projection
//! ```

use freqext::{project_spectral, HermitianMatrix, SpectralSet};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
    let a = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    HermitianMatrix::symmetrized(&a * a.adjoint())
}

pub fn run_example() -> freqext::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let x = random_psd(&mut rng, 4);
    println!("input spectrum     {:?}", x.eigenvalues()?);
    for w in [
        SpectralSet::NuclearBall { radius: 1.0 },
        SpectralSet::OperatorBall { radius: 1.0 },
        SpectralSet::TraceCap { cap: 2.0 },
    ] {
        let p = project_spectral(&w, &x)?;
        let again = project_spectral(&w, &p)?;
        println!(
            "{w:?}: spectrum {:?}, idempotence gap {:.1e}, σ_W(X) = {:.4}",
            p.eigenvalues()?,
            again.distance(&p)?,
            w.support(&x)?
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example()
}
