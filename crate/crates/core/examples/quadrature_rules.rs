//! Tensor and Monte Carlo rules on a cube and an annulus, checked against
//! known integrals.
//!
//! ```bash
//! cargo run --example quadrature_rules
//! ```

use freqext::family::sinc;
use freqext::quadrature::{derive_seed, Growth};
use freqext::{monte_carlo_rule, tensor_rule, FrequencyDomain, NodeSchedule};
use num_complex::Complex64;

pub fn run_example() -> freqext::Result<()> {
    let cube = FrequencyDomain::cube(1, 0.5)?;
    let exact_area = std::f64::consts::PI * (4.0 - 0.25);
    let annulus = FrequencyDomain::annulus(2, 0.5, 2.0)?;

    let t = tensor_rule(&cube, 2048)?;
    let v = t.integrate(|xi| Complex64::new(sinc(xi[0]).powi(4), 0.0))?;
    println!("tensor, 2048 nodes: ∫ sinc⁴ over [−1/2, 1/2] ≈ {:.10}", v.re);

    let schedule = NodeSchedule::new(500, 5000, Growth::Geometric)?;
    for k in [0, 50, 99] {
        let n = schedule.count(k, 100);
        let r = monte_carlo_rule(&annulus, n, derive_seed(8, k))?;
        let area = r.integrate(|_| Complex64::new(1.0, 0.0))?.re;
        println!("iteration {k:>2}: {n:>4} Monte Carlo nodes, area {area:.4} (exact {exact_area:.4})");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example()
}
