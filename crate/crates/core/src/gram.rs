//! The coordinate Gram matrix `G(m) = ½∫ r r* dμ`, `r = f(αξ) − m(ξ)f(ξ)`,
//! and the objectives built from it.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::family::{FamilySamples, FunctionFamily};
use crate::hermitian::HermitianMatrix;
use crate::multiplier::FrequencyMap;
use crate::quadrature::{NodeSet, QuadratureRule};
use crate::spectral::SpectralSet;

/// Nodes per block of the deterministic reduction.
const BLOCK: usize = 256;

#[derive(Clone, Debug)]
pub struct GramResult {
    pub g: HermitianMatrix,
    pub rule_id: String,
    pub floor_events: usize,
}

pub fn gram_matrix(
    family: &FunctionFamily,
    alpha: f64,
    m: &dyn FrequencyMap,
    rule: &QuadratureRule,
) -> Result<GramResult> {
    if rule.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: rule.dim(),
        });
    }
    let before = m.floor_events();
    let samples = family.sample(alpha, rule.nodes());
    let nodes = rule.nodes();
    let mvals: Vec<Complex64> = (0..nodes.len()).into_par_iter().map(|i| m.eval(nodes.get(i))).collect();
    let g = gram_from_samples(&samples, rule.weights(), &mvals, nodes)?;
    Ok(GramResult {
        g,
        rule_id: rule.id(),
        floor_events: m.floor_events().saturating_sub(before),
    })
}

/// Assembly from precomputed samples and multiplier values. Blocks of
/// consecutive nodes are accumulated in parallel, then summed in block order,
/// so the result does not depend on the thread count.
pub(crate) fn gram_from_samples(
    samples: &FamilySamples,
    weights: &[f64],
    mvals: &[Complex64],
    nodes: &NodeSet,
) -> Result<HermitianMatrix> {
    let n = samples.members();
    let count = weights.len();
    let blocks: Vec<Result<DMatrix<Complex64>>> = (0..count.div_ceil(BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = DMatrix::<Complex64>::zeros(n, n);
            let mut r = vec![Complex64::new(0.0, 0.0); n];
            for i in b * BLOCK..((b + 1) * BLOCK).min(count) {
                let v = samples.at(i);
                let w = samples.dilated_at(i);
                for k in 0..n {
                    r[k] = w[k] - mvals[i] * v[k];
                }
                if let Some(bad) = r.iter().find(|z| !(z.re.is_finite() && z.im.is_finite())) {
                    return Err(Error::NonFinite {
                        node: nodes.get(i).to_vec(),
                        value: bad.to_string(),
                    });
                }
                let wi = 0.5 * weights[i];
                for col in 0..n {
                    let rc = r[col].conj() * wi;
                    for row in 0..n {
                        acc[(row, col)] += r[row] * rc;
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = DMatrix::<Complex64>::zeros(n, n);
    for b in blocks {
        total += b?;
    }
    Ok(HermitianMatrix::symmetrized(total))
}

/// `Re(c* G c)`, with round-off negatives in `[−1e−10, 0)` clipped to 0.
pub fn approximation_error(c: &[Complex64], g: &HermitianMatrix) -> Result<f64> {
    if c.len() != g.size() {
        return Err(Error::DimensionMismatch {
            expected: g.size(),
            got: c.len(),
        });
    }
    let e = g.sesquilinear(c, c).re;
    if (-1e-10..0.0).contains(&e) {
        Ok(0.0)
    } else {
        Ok(e)
    }
}

/// `σ_W(G) + δ·trace(G)`
pub fn worst_case_objective(w: &SpectralSet, g: &HermitianMatrix, delta: f64) -> Result<f64> {
    w.validate()?;
    Ok(w.support(g)? + delta * g.trace())
}

/// Spectrum of `G(0) = ½∫ f(αξ)f(αξ)* dμ`. Full numerical rank means the
/// dilated family is linearly independent on the rule's nodes.
#[derive(Clone, Debug)]
pub struct RankDiagnostic {
    pub eigenvalues: Vec<f64>,
    pub tolerance: f64,
    pub rank: usize,
}

impl RankDiagnostic {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.eigenvalues.len()
    }
}

pub fn rank_diagnostic(family: &FunctionFamily, alpha: f64, rule: &QuadratureRule) -> Result<RankDiagnostic> {
    let zero = |_: &[f64]| Complex64::new(0.0, 0.0);
    let g = gram_matrix(family, alpha, &zero, rule)?.g;
    let eigenvalues = g.eigenvalues()?;
    let largest = eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let tolerance = 1e-12 * largest * eigenvalues.len() as f64;
    let rank = eigenvalues.iter().filter(|&&l| l > tolerance).count();
    Ok(RankDiagnostic {
        eigenvalues,
        tolerance,
        rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::FrequencyDomain;
    use crate::family::{make_translates, sinc, MemberSpec};
    use crate::multiplier::{trace_multiplier, SigmaMultiplier};
    use crate::quadrature::tensor_rule;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn translates() -> FunctionFamily {
        make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.3]]).unwrap()
    }

    /// Straightforward two-loop accumulation, one node at a time.
    fn naive_gram(
        family: &FunctionFamily,
        alpha: f64,
        m: &dyn Fn(&[f64]) -> Complex64,
        rule: &QuadratureRule,
    ) -> DMatrix<Complex64> {
        let n = family.len();
        let mut g = DMatrix::zeros(n, n);
        for (xi, &w) in rule.nodes().iter().zip(rule.weights()) {
            let v = family.eval(xi);
            let vd = family.eval_dilated(alpha, xi);
            let r = &vd - &v * m(xi);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += 0.5 * w * r[i] * r[j].conj();
                }
            }
        }
        g
    }

    #[test]
    fn exact_multiplier_gives_zero() {
        let fam = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)]).unwrap();
        let rule = tensor_rule(&FrequencyDomain::cube(1, 0.5).unwrap(), 512).unwrap();
        let mf = |xi: &[f64]| c(sinc(2.0 * xi[0]).powi(2) / sinc(xi[0]).powi(2), 0.0);
        let res = gram_matrix(&fam, 2.0, &mf, &rule).unwrap();
        assert!(res.g.frobenius_norm() <= 1e-12);
        assert_eq!(res.rule_id, "tensor:512");
        assert_eq!(res.floor_events, 0);
    }

    #[test]
    fn zero_multiplier_matches_dense_oracle() {
        let fam = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)]).unwrap();
        let rule = tensor_rule(&FrequencyDomain::cube(1, 0.5).unwrap(), 256).unwrap();
        let zero = |_: &[f64]| c(0.0, 0.0);
        let g = gram_matrix(&fam, 2.0, &zero, &rule).unwrap().g;
        // ½∫_{−1/2}^{1/2} sinc⁴(2ξ) dξ by Simpson on a fine grid
        let k = 20_000;
        let h = 1.0 / k as f64;
        let f = |x: f64| sinc(2.0 * x).powi(4);
        let mut s = f(-0.5) + f(0.5);
        for i in 1..k {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(-0.5 + i as f64 * h);
        }
        let oracle = 0.5 * s * h / 3.0;
        assert_abs_diff_eq!(g.get(0, 0).re, oracle, epsilon = 1e-5);
        assert!(g.min_eigenvalue().unwrap() > 0.0);
    }

    #[test]
    fn blocked_assembly_matches_two_loop() {
        let fam = translates();
        let rule = tensor_rule(&FrequencyDomain::cube(1, 0.5).unwrap(), 1000).unwrap();
        let m = |xi: &[f64]| trace_multiplier(&fam, 2.0, xi);
        let g = gram_matrix(&fam, 2.0, &m, &rule).unwrap().g;
        let naive = naive_gram(&fam, 2.0, &m, &rule);
        assert!((g.as_matrix() - naive).norm() <= 1e-14 * (1.0 + g.frobenius_norm()));
    }

    #[test]
    fn quadrature_refinement() {
        let fam = translates();
        let m = |xi: &[f64]| trace_multiplier(&fam, 2.0, xi);
        let cube = FrequencyDomain::cube(1, 0.5).unwrap();
        let g1 = gram_matrix(&fam, 2.0, &m, &tensor_rule(&cube, 2048).unwrap())
            .unwrap()
            .g;
        let g2 = gram_matrix(&fam, 2.0, &m, &tensor_rule(&cube, 4096).unwrap())
            .unwrap()
            .g;
        for i in 0..2 {
            for j in 0..2 {
                assert!((g1.get(i, j) - g2.get(i, j)).norm() <= 1e-6);
            }
        }
    }

    #[test]
    fn error_matches_direct_integral() {
        let fam = translates();
        let rule = tensor_rule(&FrequencyDomain::cube(1, 0.5).unwrap(), 2048).unwrap();
        let m = |xi: &[f64]| trace_multiplier(&fam, 2.0, xi);
        let g = gram_matrix(&fam, 2.0, &m, &rule).unwrap().g;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let coef = [c(s, 0.0), c(s, 0.0)];
        let direct = rule
            .integrate(|xi| {
                let r = fam.eval_dilated(2.0, xi) - fam.eval(xi) * m(xi);
                c(0.5 * (coef[0] * r[0] + coef[1] * r[1]).norm_sqr(), 0.0)
            })
            .unwrap()
            .re;
        assert_abs_diff_eq!(approximation_error(&coef, &g).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn approximation_error_examples() {
        let i2 = HermitianMatrix::identity(2);
        assert_eq!(approximation_error(&[c(0.0, 0.0); 2], &i2).unwrap(), 0.0);
        assert_eq!(approximation_error(&[c(1.0, 0.0), c(0.0, 0.0)], &i2).unwrap(), 1.0);
        assert!(approximation_error(&[c(1.0, 0.0)], &i2).is_err());
    }

    #[test]
    fn objective_examples() {
        let g = HermitianMatrix::from_real_diagonal(&[3.0, 1.0]);
        let nuc = SpectralSet::NuclearBall { radius: 1.0 };
        assert_abs_diff_eq!(worst_case_objective(&nuc, &g, 0.0).unwrap(), 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(worst_case_objective(&nuc, &g, 0.5).unwrap(), 5.0, epsilon = 1e-14);
        let op = SpectralSet::OperatorBall { radius: 1.0 };
        assert_abs_diff_eq!(worst_case_objective(&op, &g, 0.0).unwrap(), 4.0, epsilon = 1e-14);
        assert_eq!(
            worst_case_objective(&nuc, &HermitianMatrix::zeros(2), 0.3).unwrap(),
            0.0
        );
    }

    #[test]
    fn support_matches_brute_force_over_extreme_points() {
        // σ_W(G) = max over D_W of Σ d_i λ_i; for the ℓ₁ ball the maximum sits
        // at a signed vertex, for the ℓ∞ ball at a sign vector
        let lam = [3.0, -1.5, 0.25];
        let g = HermitianMatrix::from_real_diagonal(&lam);
        let mut best_l1: f64 = 0.0;
        for l in lam {
            for s in [-1.0, 1.0] {
                best_l1 = best_l1.max(s * l);
            }
        }
        let mut best_linf = f64::MIN;
        for mask in 0..8 {
            let v: f64 = (0..3).map(|i| if mask >> i & 1 == 1 { lam[i] } else { -lam[i] }).sum();
            best_linf = best_linf.max(v);
        }
        let nuc = SpectralSet::NuclearBall { radius: 1.0 };
        let op = SpectralSet::OperatorBall { radius: 1.0 };
        assert_abs_diff_eq!(worst_case_objective(&nuc, &g, 0.0).unwrap(), best_l1, epsilon = 1e-13);
        assert_abs_diff_eq!(worst_case_objective(&op, &g, 0.0).unwrap(), best_linf, epsilon = 1e-13);
    }

    #[test]
    fn floor_events_reported() {
        let fam = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)]).unwrap();
        let m = SigmaMultiplier::trace(fam.clone(), 2.0).unwrap().with_floor(1e-2);
        // sinc⁴ drops below 1e−2 near |ξ| ≥ 0.8
        let rule = tensor_rule(&FrequencyDomain::cube(1, 1.0).unwrap(), 200).unwrap();
        let res = gram_matrix(&fam, 2.0, &m, &rule).unwrap();
        assert!(res.floor_events > 0);
        assert_eq!(res.floor_events, m.floor_events());
    }

    #[test]
    fn rank_of_independent_translates() {
        let rule = tensor_rule(&FrequencyDomain::cube(1, 0.5).unwrap(), 512).unwrap();
        let diag = rank_diagnostic(&translates(), 2.0, &rule).unwrap();
        assert!(diag.is_full_rank());
        let same = FunctionFamily::new(vec![
            MemberSpec::sinc_power(2, 1),
            MemberSpec::sinc_power(2, 1).with_dilation(1.0 + 1e-15),
        ]);
        if let Ok(fam) = same {
            let d = rank_diagnostic(&fam, 2.0, &rule).unwrap();
            assert_eq!(d.rank, 1);
        }
    }
}
