//! The boundary window `w_N` forces decay of the cascade limit: with a
//! constant mask the limit is `sinc^N` up to phase.
//!
//! ```bash
//! cargo run --release --example windowed_decay
//! ```

use std::sync::Arc;

use freqext::multiresolution::{apply_boundary_window, decay_slope};
use freqext::{cascade, GridGeometry, PeriodicMask};
use num_complex::Complex64;

pub fn run_example() -> freqext::Result<f64> {
    let mut last = 0.0;
    for order in [1, 2, 4] {
        let m0 = |_: &[f64]| Complex64::new(1.0, 0.0);
        let mask = PeriodicMask::exact(Arc::new(apply_boundary_window(m0, order)), 1);
        let phi_hat = cascade(&mask, 64, &GridGeometry::symmetric(1, 3, 1.0)?)?;
        let slope = decay_slope(|x| phi_hat.eval(&[x]).norm(), 4, 64, 32)?;
        println!("N = {order}: log-log slope over 4 ≤ |ξ| ≤ 64 is {slope:.3}");
        last = slope;
    }
    Ok(last)
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example().map(|_| ())
}
