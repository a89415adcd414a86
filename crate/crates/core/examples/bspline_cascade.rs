//! From the single-function multiplier of sinc² to the linear B-spline and
//! its wavelet: cascade, periodization, wavelet mask and synthesis.
//!
//! ```bash
//! cargo run --release --example bspline_cascade
//! ```

use std::sync::Arc;

use freqext::extrapolation::reconstruct_space_box;
use freqext::family::sinc;
use freqext::multiresolution::{default_cascade_grid, periodization_phi, periodize_mask, wavelet_hat, wavelet_mask};
use freqext::{cascade, FunctionFamily, MemberSpec, PeriodicMask, SigmaMultiplier};

pub struct Outcome {
    pub phi_hat_error: f64,
    pub phi_error: f64,
}

pub fn run_example() -> freqext::Result<Outcome> {
    let family = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)])?;
    let m = SigmaMultiplier::trace(family, 2.0)?;
    let mask = periodize_mask(&PeriodicMask::exact(Arc::new(m), 1), 1, 8192)?;

    let grid = default_cascade_grid();
    let phi_hat = cascade(&mask, 128, &grid)?;
    let phi_hat_error = (0..grid.len())
        .map(|i| grid.node(i)[0])
        .filter(|x| x.abs() <= 4.0)
        .map(|x| (phi_hat.eval(&[x]).re - sinc(x).powi(2)).abs())
        .fold(0.0, f64::max);

    let phi = reconstruct_space_box(&phi_hat.grid, &[-2.0], &[2.0], &[512])?;
    let phi_error = (0..phi.len())
        .map(|i| {
            let x = phi.geometry.node(i)[0];
            (phi.values[i].re - (1.0 - x.abs()).max(0.0)).abs()
        })
        .fold(0.0, f64::max);

    let big_phi = periodization_phi(&phi_hat, 257, 1024)?;
    let g = wavelet_mask(&mask, &big_phi)?;
    let psi_hat = wavelet_hat(&g, &phi_hat, &grid)?;
    let psi = reconstruct_space_box(&psi_hat, &[-2.0], &[2.0], &[512])?;
    let psi_im = psi.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);

    println!("sup |φ̂ − sinc²| on [−4, 4]: {phi_hat_error:.2e}");
    println!("sup |φ − hat|: {phi_error:.4} (window [−8, 8) truncates the tail)");
    println!(
        "Φ(0) = {:.6}, Φ(1/2) = {:.6}",
        big_phi.eval(&[0.0]).re,
        big_phi.eval(&[0.5]).re
    );
    println!("g(1/4) = {:.6}, max |Im ψ| = {psi_im:.1e}", g.eval(&[0.25]));
    Ok(Outcome {
        phi_hat_error,
        phi_error,
    })
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example().map(|_| ())
}
