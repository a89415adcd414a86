//! Recovering the refinement mask of the linear B-spline from Σ-multipliers
//! of its integer translates, with `Σ = diag(h)` and `h = (1/4, 1/2, 1/4)`.
//!
//! With `φ̂(2ξ) = ĥ(ξ)φ̂(ξ)` the three families give `|ĥ|²`, `ĥ²` and
//! `ĥ(ξ)ĥ(2ξ)`; the last one extrapolates by two scales at once.
//!
//! ```bash
//! cargo run --example mask_recovery
//! ```

use freqext::family::sinc;
use freqext::{make_translates, FunctionFamily, HermitianMatrix, MemberSpec, SigmaMultiplier};
use num_complex::Complex64;
use std::f64::consts::PI;

/// `φ̂(ξ) = e^{2πiξ} sinc²(ξ)`: the linear B-spline supported on `[−2, 0]`.
pub fn phi_hat() -> MemberSpec {
    MemberSpec::sinc_power(2, 1).with_modulation(vec![-1.0])
}

pub fn h_hat(xi: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * PI * xi) * (PI * xi).cos().powi(2)
}

/// Family `{φ̂·e^{−2πiξ·sk} : k ∈ {0, 1, 2}}`.
pub fn family(step: f64) -> freqext::Result<FunctionFamily> {
    make_translates(phi_hat(), &[vec![step], vec![2.0 * step]])
}

pub fn multiplier(step: f64, alpha: f64) -> freqext::Result<SigmaMultiplier> {
    SigmaMultiplier::new(
        family(step)?,
        alpha,
        HermitianMatrix::from_real_diagonal(&[0.25, 0.5, 0.25]),
        0.0,
    )
}

pub fn run_example() -> freqext::Result<f64> {
    type Case = (&'static str, f64, fn(f64) -> Complex64);
    let cases: [Case; 3] = [
        ("|ĥ|²", 1.0, |x| Complex64::new(h_hat(x).norm_sqr(), 0.0)),
        ("ĥ²", -1.0, |x| h_hat(x) * h_hat(x)),
        ("ĥ(ξ)ĥ(2ξ)", -2.0, |x| h_hat(x) * h_hat(2.0 * x)),
    ];
    let mut worst: f64 = 0.0;
    for (name, step, target) in cases {
        let m = multiplier(step, 2.0)?;
        let err = (0..1024)
            .map(|i| -0.5 + (i as f64 + 0.5) / 1024.0)
            .map(|x| (m.eval(&[x]) - target(x)).norm())
            .fold(0.0, f64::max);
        println!("translates by {step:+}: m_Σ vs {name}: sup error {err:.2e}");
        worst = worst.max(err);
    }
    let m = multiplier(-2.0, 2.0)?;
    let x = 0.3;
    let phi = |t: f64| Complex64::from_polar(1.0, 2.0 * PI * t) * sinc(t).powi(2);
    println!(
        "two-scale check at ξ = {x}: |m φ̂(ξ) − φ̂(4ξ)| = {:.2e}",
        (m.eval(&[x]) * phi(x) - phi(4.0 * x)).norm()
    );
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example().map(|_| ())
}
