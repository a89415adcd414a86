//! The trace multiplier of a family of translates is the single-function
//! multiplier times an average of modulations.
//!
//! ```bash
//! cargo run --example trace_multiplier
//! ```

use freqext::family::sinc;
use freqext::{make_translates, trace_multiplier, MemberSpec, SigmaMultiplier};
use num_complex::Complex64;
use std::f64::consts::PI;

pub fn run_example() -> freqext::Result<f64> {
    let offsets = [0.0, 0.2, 0.4];
    let family = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.2], vec![0.4]])?;
    let alpha = 2.0;
    let m = SigmaMultiplier::trace(family.clone(), alpha)?;
    let mut worst: f64 = 0.0;
    for i in 0..512 {
        let xi = -0.5 + (i as f64 + 0.5) / 512.0;
        let mf = sinc(alpha * xi).powi(2) / sinc(xi).powi(2);
        let avg: Complex64 = offsets
            .iter()
            .map(|x| Complex64::from_polar(1.0, -2.0 * PI * (alpha - 1.0) * xi * x))
            .sum::<Complex64>()
            / offsets.len() as f64;
        let closed = avg * mf;
        worst = worst.max((trace_multiplier(&family, alpha, &[xi]) - closed).norm());
        worst = worst.max((m.eval(&[xi]) - closed).norm());
    }
    println!("sup |m_I − (1/n) m_f Σ e^(−2πi(α−1)ξx_k)| = {worst:.2e}");
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example().map(|_| ())
}
