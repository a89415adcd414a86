//! A single sinc² member is extrapolated exactly: its only Σ-multiplier is
//! `f(2ξ)/f(ξ) = cos²(πξ)`.
//!
//! ```bash
//! cargo run --example single_function
//! ```

use freqext::extrapolation::{extrapolate, extrapolation_error};
use freqext::{
    FrequencyDomain, FunctionFamily, GridField, GridGeometry, HermitianMatrix, LowSource, MemberSpec, SigmaMultiplier,
};
use num_complex::Complex64;

pub fn run_example() -> freqext::Result<f64> {
    let family = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)])?;
    let omega0 = FrequencyDomain::cube(1, 0.5)?;
    // any positive 1×1 Σ gives the same multiplier
    let sigma = HermitianMatrix::from_real_diagonal(&[3.7]);
    let m = SigmaMultiplier::new(family.clone(), 2.0, sigma, 0.0)?.with_probe_floor(&omega0, 2048)?;

    let target = GridGeometry::symmetric(1, 2049, 1.0)?;
    let low = LowSource::exact(family.clone(), vec![Complex64::new(1.0, 0.0)])?;
    let pred = extrapolate(&m, &low, 2.0, &omega0, &target)?;
    let truth = GridField::from_fn(target, |xi| family.eval(xi)[0]);
    let err = extrapolation_error(&pred, &truth, &omega0.dilate(2.0)?)?;
    println!(
        "m(0.2) = {:.12}  cos²(0.2π) = {:.12}",
        m.eval(&[0.2]).re,
        (0.2 * std::f64::consts::PI).cos().powi(2)
    );
    println!("relative L² error on [−1, 1]: {err:.3e}");
    Ok(err)
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example().map(|_| ())
}
