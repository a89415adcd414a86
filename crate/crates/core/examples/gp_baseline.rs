//! Gerchberg–Papoulis on a hat supported in `[0, 1]` with data on
//! `[−1, 1]`: the residual on the data set decreases monotonically.
//!
//! ```bash
//! cargo run --release --example gp_baseline
//! ```

use freqext::extrapolation::{fft_analysis, fft_spatial_geometry, gp_iterate, GpResult};
use freqext::{FrequencyDomain, GridField, GridGeometry};
use num_complex::Complex64;

pub fn run_example() -> freqext::Result<GpResult> {
    let freq = GridGeometry::fft(1, 4096, 0.6)?;
    let space = fft_spatial_geometry(&freq)?;
    let u = GridField::from_fn(space, |x| {
        Complex64::new((1.0 - (2.0 * x[0] - 1.0).abs()).max(0.0), 0.0)
    });
    let data = fft_analysis(&u, &freq)?;
    let omega0 = FrequencyDomain::cube(1, 1.0)?;
    let res = gp_iterate(&data, &omega0, &[0.0], &[1.0], 200)?;
    for k in [0, 9, 49, 199] {
        println!("step {:>3}: residual {:.3e}", k + 1, res.residuals[k]);
    }
    Ok(res)
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example().map(|_| ())
}
