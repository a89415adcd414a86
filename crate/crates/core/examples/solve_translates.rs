//! Fixed-point solve for two translates of sinc², with the contraction
//! constants checked first.
//!
//! ```bash
//! cargo run --release --example solve_translates
//! ```

use freqext::solver::{fixed_point_residual, RuleSource};
use freqext::{
    make_translates, solve, tensor_rule, validate_params, FrequencyDomain, MemberSpec, SolverConfig, SpectralSet,
};

pub fn run_example() -> freqext::Result<f64> {
    let family = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.25]])?;
    let omega0 = FrequencyDomain::cube(1, 0.5)?;
    let rule = tensor_rule(&omega0, 1024)?;
    let w = SpectralSet::NuclearBall { radius: 1.0 };

    // pick τ_G so that the estimated Lipschitz bound is 0.65
    let probe = SolverConfig::new(0.1, 1.0, 0.3, 1, w, RuleSource::Fixed(rule.clone()));
    let per_unit = validate_params(&family, 2.0, &omega0, &probe, &rule)?.bound - 0.3;
    let tau_g = 0.35 / per_unit;
    let config = SolverConfig::new(0.1, tau_g, 0.3, 200, w, RuleSource::Fixed(rule.clone()));
    let diag = validate_params(&family, 2.0, &omega0, &config, &rule)?;
    println!(
        "τ_G = {tau_g:.3e}, contraction bound {:.3} (satisfied: {})",
        diag.bound, diag.satisfied
    );

    let out = solve(&family, 2.0, &omega0, &config)?;
    let residual = fixed_point_residual(&out.sigma, &family, 2.0, &config, &rule)?;
    println!(
        "after {} iterations: objective {:.6e}, worst step ratio {:.3}, residual {residual:.2e}",
        out.trace.len(),
        out.trace.records.last().map_or(f64::NAN, |r| r.objective),
        out.trace.contraction_ratio(3).unwrap_or(0.0),
    );
    println!("Σ* eigenvalues: {:?}", out.sigma.eigenvalues()?);
    Ok(residual)
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example().map(|_| ())
}
