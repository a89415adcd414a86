//! Regularized fixed-point iteration for the optimal Σ-multiplier:
//!
//! ```text
//! m⁽ᵏ⁺¹⁾ = ⟨f, D_α f⟩_{δI+Σ⁽ᵏ⁾} / ‖f‖²_{δI+Σ⁽ᵏ⁾}
//! Σ⁽ᵏ⁺¹⁾ = proj_W(τ_Σ Σ⁽ᵏ⁾ + τ_G G(m⁽ᵏ⁺¹⁾))
//! ```

use log::debug;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::domain::FrequencyDomain;
use crate::error::{Error, Result};
use crate::family::{FamilySamples, FunctionFamily};
use crate::gram::{gram_from_samples, worst_case_objective};
use crate::hermitian::HermitianMatrix;
use crate::multiplier::{SigmaMultiplier, RELATIVE_FLOOR};
use crate::quadrature::{derive_seed, monte_carlo_rule, NodeSchedule, QuadratureRule};
use crate::spectral::SpectralSet;

/// Where each iteration's quadrature nodes come from.
#[derive(Clone, Debug)]
pub enum RuleSource {
    /// The same rule at every iteration; family samples are computed once.
    Fixed(QuadratureRule),
    /// A fresh Monte Carlo rule per iteration, sized by the schedule and
    /// seeded with `derive_seed(seed, k)`.
    MonteCarlo(NodeSchedule),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub delta: f64,
    pub tau_g: f64,
    pub tau_sigma: f64,
    pub iterations: usize,
    pub w: SpectralSet,
    pub rules: RuleSource,
    pub seed: u64,
    /// Starting iterate; the identity when `None`.
    pub sigma0: Option<HermitianMatrix>,
    /// Trace bound `Δ` used by [`validate_params`]; defaults to
    /// `max(sup trace W, n)`.
    pub trace_bound: Option<f64>,
    /// Permits `δ = 0`. The iteration is then not guaranteed to be defined
    /// and floored nodes are common; use only for diagnostics.
    pub unregularized: bool,
}

impl SolverConfig {
    pub fn new(delta: f64, tau_g: f64, tau_sigma: f64, iterations: usize, w: SpectralSet, rules: RuleSource) -> Self {
        Self {
            delta,
            tau_g,
            tau_sigma,
            iterations,
            w,
            rules,
            seed: 0,
            sigma0: None,
            trace_bound: None,
            unregularized: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sigma0(mut self, sigma0: HermitianMatrix) -> Self {
        self.sigma0 = Some(sigma0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let delta_ok = if self.unregularized {
            self.delta >= 0.0
        } else {
            self.delta > 0.0
        };
        if !(self.delta.is_finite() && delta_ok) {
            return Err(Error::param("delta", format!("must be positive, got {}", self.delta)));
        }
        if !(self.tau_g.is_finite() && self.tau_g >= 0.0) {
            return Err(Error::param(
                "tau_g",
                format!("must be nonnegative, got {}", self.tau_g),
            ));
        }
        if !(self.tau_sigma.is_finite() && self.tau_sigma >= 0.0) {
            return Err(Error::param(
                "tau_sigma",
                format!("must be nonnegative, got {}", self.tau_sigma),
            ));
        }
        if self.iterations == 0 {
            return Err(Error::param("iterations", "must be at least 1"));
        }
        if let Some(t) = self.trace_bound {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::param("trace_bound", format!("must be positive, got {t}")));
            }
        }
        self.w.validate()
    }

    fn sigma0(&self, n: usize) -> Result<HermitianMatrix> {
        match &self.sigma0 {
            Some(s) if s.size() != n => Err(Error::DimensionMismatch {
                expected: n,
                got: s.size(),
            }),
            Some(s) => Ok(s.clone()),
            None => Ok(HermitianMatrix::identity(n)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `σ_W(G(m⁽ᵏ⁺¹⁾)) + δ·trace G(m⁽ᵏ⁺¹⁾)`
    pub objective: f64,
    /// `‖Σ⁽ᵏ⁺¹⁾ − Σ⁽ᵏ⁾‖_F`
    pub step: f64,
    pub nodes: usize,
    /// `‖Σ⁽ᵏ⁺¹⁾‖_F`
    pub sigma_norm: f64,
    pub sigma_trace: f64,
    pub floor_events: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<IterationRecord>,
}

impl SolverTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn steps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.step).collect()
    }

    pub fn objectives(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.objective).collect()
    }

    /// Largest ratio of consecutive steps from iteration `skip` on, ignoring
    /// steps already at round-off level.
    pub fn contraction_ratio(&self, skip: usize) -> Option<f64> {
        let steps = self.steps();
        let scale = steps.iter().cloned().fold(0.0, f64::max);
        steps
            .windows(2)
            .skip(skip)
            .filter(|w| w[0] > 1e-13 * scale.max(1.0))
            .map(|w| w[1] / w[0])
            .reduce(f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub sigma: HermitianMatrix,
    pub multiplier: SigmaMultiplier,
    pub trace: SolverTrace,
}

/// Multiplier values on sampled nodes, with the floor set relative to the
/// largest denominator among them. Returns the values, the floor used and
/// the number of floored nodes.
fn multiplier_on_samples(m: &SigmaMultiplier, samples: &FamilySamples) -> (Vec<Complex64>, f64, usize) {
    let count = samples.nodes();
    let max_den = (0..count)
        .into_par_iter()
        .map(|i| m.denominator(samples.at(i)))
        .reduce(|| 0.0, f64::max);
    let floor = RELATIVE_FLOOR * max_den;
    let m = m.clone().with_floor(floor);
    let vals: Vec<Option<Complex64>> = (0..count)
        .into_par_iter()
        .map(|i| m.eval_pair(samples.at(i), samples.dilated_at(i)))
        .collect();
    let floored = vals.iter().filter(|v| v.is_none()).count();
    let vals = vals.into_iter().map(|v| v.unwrap_or_default()).collect();
    (vals, floor, floored)
}

fn check_dims(family: &FunctionFamily, domain: &FrequencyDomain, config: &SolverConfig) -> Result<()> {
    if family.dim() != domain.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: domain.dim(),
        });
    }
    if let RuleSource::Fixed(rule) = &config.rules {
        if rule.dim() != family.dim() {
            return Err(Error::DimensionMismatch {
                expected: family.dim(),
                got: rule.dim(),
            });
        }
    }
    Ok(())
}

/// One update `Σ ↦ proj_W(τ_Σ Σ + τ_G G(m_Σ))` on fixed samples.
struct Update {
    next: HermitianMatrix,
    objective: f64,
    floor: f64,
    floored: usize,
}

fn update(
    family: &FunctionFamily,
    alpha: f64,
    config: &SolverConfig,
    sigma: &HermitianMatrix,
    rule: &QuadratureRule,
    samples: &FamilySamples,
) -> Result<Update> {
    let m = SigmaMultiplier::new(family.clone(), alpha, sigma.clone(), config.delta)?;
    let (mvals, floor, floored) = multiplier_on_samples(&m, samples);
    let g = gram_from_samples(samples, rule.weights(), &mvals, rule.nodes())?;
    let objective = worst_case_objective(&config.w, &g, config.delta)?;
    let next = config.w.project(&sigma.combine(config.tau_sigma, &g, config.tau_g)?)?;
    Ok(Update {
        next,
        objective,
        floor,
        floored,
    })
}

pub fn solve(
    family: &FunctionFamily,
    alpha: f64,
    domain: &FrequencyDomain,
    config: &SolverConfig,
) -> Result<SolveOutput> {
    solve_observed(family, alpha, domain, config, |_, _| {})
}

/// [`solve`], calling `observe(k, Σ⁽ᵏ⁺¹⁾)` after every update.
pub fn solve_observed<F>(
    family: &FunctionFamily,
    alpha: f64,
    domain: &FrequencyDomain,
    config: &SolverConfig,
    mut observe: F,
) -> Result<SolveOutput>
where
    F: FnMut(usize, &HermitianMatrix),
{
    config.validate()?;
    check_dims(family, domain, config)?;
    let mut sigma = config.sigma0(family.len())?;
    let fixed = match &config.rules {
        RuleSource::Fixed(rule) => Some((rule.clone(), family.sample(alpha, rule.nodes()))),
        RuleSource::MonteCarlo(_) => None,
    };
    let mut trace = SolverTrace::default();
    let mut last_floor = 0.0;
    for k in 0..config.iterations {
        let fresh;
        let (rule, samples) = match (&fixed, &config.rules) {
            (Some((rule, samples)), _) => (rule, samples),
            (None, RuleSource::MonteCarlo(schedule)) => {
                let count = schedule.count(k, config.iterations);
                let rule = monte_carlo_rule(domain, count, derive_seed(config.seed, k))?;
                let samples = family.sample(alpha, rule.nodes());
                fresh = (rule, samples);
                (&fresh.0, &fresh.1)
            }
            (None, RuleSource::Fixed(_)) => unreachable!("fixed rules are sampled up front"),
        };
        let step = update(family, alpha, config, &sigma, rule, samples).map_err(|e| match e {
            Error::NonFinite { node, value } => Error::Solver {
                iteration: k,
                reason: format!("non-finite residual {value} at {node:?}"),
            },
            other => other,
        })?;
        if !step.objective.is_finite() {
            return Err(Error::Solver {
                iteration: k,
                reason: format!("objective is {}", step.objective),
            });
        }
        let record = IterationRecord {
            iteration: k,
            objective: step.objective,
            step: step.next.distance(&sigma)?,
            nodes: rule.len(),
            sigma_norm: step.next.frobenius_norm(),
            sigma_trace: step.next.trace(),
            floor_events: step.floored,
        };
        debug!(
            "iteration {k}: objective {:.6e}, step {:.3e}, nodes {}",
            record.objective, record.step, record.nodes
        );
        trace.records.push(record);
        observe(k, &step.next);
        last_floor = step.floor;
        sigma = step.next;
    }
    let multiplier = SigmaMultiplier::new(family.clone(), alpha, sigma.clone(), config.delta)?.with_floor(last_floor);
    Ok(SolveOutput {
        sigma,
        multiplier,
        trace,
    })
}

/// `‖Σ − proj_W(τ_Σ Σ + τ_G G(m_{Σ,δ}))‖_F` on the given rule.
pub fn fixed_point_residual(
    sigma: &HermitianMatrix,
    family: &FunctionFamily,
    alpha: f64,
    config: &SolverConfig,
    rule: &QuadratureRule,
) -> Result<f64> {
    config.validate()?;
    let samples = family.sample(alpha, rule.nodes());
    let step = update(family, alpha, config, sigma, rule, &samples)?;
    step.next.distance(sigma)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContractionDiagnostics {
    /// `Δ`
    pub trace_bound: f64,
    /// `κ = n + Δ/δ`
    pub kappa: f64,
    pub r_m: f64,
    pub l_m: f64,
    pub r_f: f64,
    /// `τ_Σ + 2n τ_G R_F L_M (1 + R_M)`
    pub bound: f64,
    pub satisfied: bool,
}

/// Estimates the contraction constants of the fixed-point map by quadrature
/// on `probe`. The ratio integrals are weighted means over the probe nodes;
/// `|Ω₀|` is the domain's measure.
pub fn validate_params(
    family: &FunctionFamily,
    alpha: f64,
    domain: &FrequencyDomain,
    config: &SolverConfig,
    probe: &QuadratureRule,
) -> Result<ContractionDiagnostics> {
    config.validate()?;
    if config.delta <= 0.0 {
        return Err(Error::param("delta", "contraction constants need δ > 0"));
    }
    if probe.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: probe.dim(),
        });
    }
    let n = family.len();
    let trace_bound = config
        .trace_bound
        .unwrap_or_else(|| config.w.max_trace(n).max(n as f64));
    let kappa = n as f64 + trace_bound / config.delta;
    let measure = domain.measure().unwrap_or_else(|| probe.total_weight());

    let samples = family.sample(alpha, probe.nodes());
    let total_weight = probe.total_weight();
    let mut mean2 = 0.0;
    let mut mean4 = 0.0;
    let mut r_f: f64 = 0.0;
    for (i, &w) in probe.weights().iter().enumerate() {
        let v = samples.at(i);
        let d = samples.dilated_at(i);
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if nv <= 0.0 {
            return Err(Error::VanishingFamily(probe.nodes().get(i).to_vec()));
        }
        let nd: f64 = d.iter().map(|z| z.norm_sqr()).sum();
        let ratio = nd / nv;
        mean2 += w * ratio;
        mean4 += w * ratio * ratio;
        for z in v.iter().chain(d) {
            r_f = r_f.max(z.norm());
        }
    }
    mean2 /= total_weight;
    mean4 /= total_weight;

    let root = measure.sqrt();
    let r_m = kappa * root * mean2.sqrt();
    let l_m = root / config.delta * (1.0 + kappa * mean4.sqrt());
    let bound = config.tau_sigma + 2.0 * n as f64 * config.tau_g * r_f * l_m * (1.0 + r_m);
    Ok(ContractionDiagnostics {
        trace_bound,
        kappa,
        r_m,
        l_m,
        r_f,
        bound,
        satisfied: bound < 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{make_translates, sinc, MemberSpec};
    use crate::quadrature::{tensor_rule, Growth};
    use approx::assert_abs_diff_eq;

    fn sinc2() -> FunctionFamily {
        FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)]).unwrap()
    }

    fn half_cube() -> FrequencyDomain {
        FrequencyDomain::cube(1, 0.5).unwrap()
    }

    fn fixed(res: usize) -> RuleSource {
        RuleSource::Fixed(tensor_rule(&half_cube(), res).unwrap())
    }

    #[test]
    fn single_function_recovers_its_multiplier() {
        let cfg = SolverConfig::new(
            1e-6,
            0.25,
            0.5,
            20,
            SpectralSet::NuclearBall { radius: 1.0 },
            fixed(256),
        );
        let out = solve(&sinc2(), 2.0, &half_cube(), &cfg).unwrap();
        assert_eq!(out.trace.len(), 20);
        for i in 0..200 {
            let xi = -0.5 + i as f64 / 199.0;
            if sinc(xi).powi(4) < 1e-3 {
                continue;
            }
            let mf = sinc(2.0 * xi).powi(2) / sinc(xi).powi(2);
            assert_abs_diff_eq!(out.multiplier.eval(&[xi]).re, mf, epsilon = 1e-6);
        }
    }

    #[test]
    fn iterates_stay_in_w_and_psd() {
        let fam = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.25], vec![-0.4]]).unwrap();
        let w = SpectralSet::NuclearBall { radius: 1.0 };
        let cfg = SolverConfig::new(0.1, 0.05, 0.3, 15, w, fixed(128));
        let out = solve(&fam, 2.0, &half_cube(), &cfg).unwrap();
        assert!(w.contains(&out.sigma, 1e-10).unwrap());
        assert!(out.sigma.min_eigenvalue().unwrap() >= -1e-10);
        for r in &out.trace.records {
            assert!(r.objective.is_finite());
            assert!(r.sigma_trace <= 1.0 + 1e-10);
        }
    }

    #[test]
    fn fixed_rule_contracts_and_certifies() {
        let fam = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.25]]).unwrap();
        let rule = tensor_rule(&half_cube(), 128).unwrap();
        let mut cfg = SolverConfig::new(
            0.1,
            1.0,
            0.3,
            60,
            SpectralSet::NuclearBall { radius: 1.0 },
            RuleSource::Fixed(rule.clone()),
        );
        let per_unit = validate_params(&fam, 2.0, &half_cube(), &cfg, &rule).unwrap().bound - cfg.tau_sigma;
        cfg.tau_g = 0.5 * (1.0 - cfg.tau_sigma) / per_unit;
        assert!(validate_params(&fam, 2.0, &half_cube(), &cfg, &rule).unwrap().satisfied);
        let out = solve(&fam, 2.0, &half_cube(), &cfg).unwrap();
        assert!(out.trace.contraction_ratio(3).unwrap_or(0.0) < 1.0);
        let res = fixed_point_residual(&out.sigma, &fam, 2.0, &cfg, &rule).unwrap();
        assert!(res <= 1e-8, "residual {res}");
    }

    #[test]
    fn residual_invariant_to_node_order() {
        let fam = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.25]]).unwrap();
        let rule = tensor_rule(&half_cube(), 300).unwrap();
        let cfg = SolverConfig::new(
            0.1,
            0.01,
            0.3,
            5,
            SpectralSet::NuclearBall { radius: 1.0 },
            RuleSource::Fixed(rule.clone()),
        );
        let sigma = HermitianMatrix::from_real_diagonal(&[0.3, 0.2]);
        let order: Vec<usize> = (0..rule.len()).rev().collect();
        let a = fixed_point_residual(&sigma, &fam, 2.0, &cfg, &rule).unwrap();
        let b = fixed_point_residual(&sigma, &fam, 2.0, &cfg, &rule.reordered(&order)).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }

    #[test]
    fn zero_sigma_is_not_fixed() {
        let fam = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.25]]).unwrap();
        let rule = tensor_rule(&half_cube(), 64).unwrap();
        let cfg = SolverConfig::new(
            0.1,
            0.5,
            0.3,
            1,
            SpectralSet::NuclearBall { radius: 1.0 },
            RuleSource::Fixed(rule.clone()),
        );
        let r = fixed_point_residual(&HermitianMatrix::zeros(2), &fam, 2.0, &cfg, &rule).unwrap();
        assert!(r > 0.0);
    }

    #[test]
    fn monte_carlo_schedule_and_determinism() {
        let fam = make_translates(MemberSpec::sinc_power(2, 1), &[vec![0.25]]).unwrap();
        let schedule = NodeSchedule::new(50, 400, Growth::Geometric).unwrap();
        let w = SpectralSet::NuclearBall { radius: 1.0 };
        let cfg = SolverConfig::new(1e-3, 0.1, 0.5, 8, w, RuleSource::MonteCarlo(schedule)).with_seed(7);
        let a = solve(&fam, 2.0, &half_cube(), &cfg).unwrap();
        let b = solve(&fam, 2.0, &half_cube(), &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        let nodes: Vec<usize> = a.trace.records.iter().map(|r| r.nodes).collect();
        assert_eq!(nodes[0], 50);
        assert_eq!(*nodes.last().unwrap(), 400);
        assert!(nodes.windows(2).all(|p| p[0] <= p[1]));
        for r in &a.trace.records {
            assert!(r.sigma_trace <= w.max_trace(2) + 1e-10);
        }
    }

    #[test]
    fn validate_params_examples() {
        let rule = tensor_rule(&half_cube(), 256).unwrap();
        let w = SpectralSet::NuclearBall { radius: 1.0 };
        let mut cfg = SolverConfig::new(0.1, 0.0, 0.99, 1, w, RuleSource::Fixed(rule.clone()));
        let d = validate_params(&sinc2(), 2.0, &half_cube(), &cfg, &rule).unwrap();
        assert!(d.satisfied);
        assert_abs_diff_eq!(d.bound, 0.99);
        assert_abs_diff_eq!(d.kappa, 11.0, epsilon = 1e-12);
        assert!(d.r_m.is_finite() && d.l_m.is_finite() && d.r_f.is_finite());

        cfg.tau_sigma = 1.0;
        cfg.tau_g = 1e-9;
        assert!(
            !validate_params(&sinc2(), 2.0, &half_cube(), &cfg, &rule)
                .unwrap()
                .satisfied
        );
    }

    #[test]
    fn validate_params_oracle_constants() {
        // n = 1: the ratio ‖f(2ξ)‖²/‖f(ξ)‖² is cos⁴(πξ), so both means are
        // known integrals over [−1/2, 1/2]: ∫cos⁴ = 3/8 and ∫cos⁸ = 35/128
        let rule = tensor_rule(&half_cube(), 4096).unwrap();
        let cfg = SolverConfig::new(
            0.1,
            0.01,
            0.5,
            1,
            SpectralSet::NuclearBall { radius: 1.0 },
            RuleSource::Fixed(rule.clone()),
        );
        let d = validate_params(&sinc2(), 2.0, &half_cube(), &cfg, &rule).unwrap();
        assert_abs_diff_eq!(d.r_m, 11.0 * (3.0f64 / 8.0).sqrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(d.l_m, 10.0 * (1.0 + 11.0 * (35.0f64 / 128.0).sqrt()), epsilon = 1e-5);
        assert_abs_diff_eq!(d.r_f, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn vanishing_family_reported() {
        let rule = tensor_rule(&FrequencyDomain::cube(1, 1.0).unwrap(), 4).unwrap();
        // nodes at ±0.25, ±0.75 miss the zero; a node at exactly 1 does not
        let cfg = SolverConfig::new(
            0.1,
            0.01,
            0.5,
            1,
            SpectralSet::NuclearBall { radius: 1.0 },
            RuleSource::Fixed(rule.clone()),
        );
        assert!(validate_params(&sinc2(), 2.0, &half_cube(), &cfg, &rule).is_ok());
        let zero = QuadratureRule::new(
            crate::quadrature::NodeSet::from_points(1, &[vec![1.0]]).unwrap(),
            vec![1.0],
            crate::quadrature::RuleKind::Tensor,
            None,
        )
        .unwrap();
        assert!(matches!(
            validate_params(&sinc2(), 2.0, &half_cube(), &cfg, &zero),
            Err(Error::VanishingFamily(_))
        ));
    }

    #[test]
    fn rejects_bad_config() {
        let w = SpectralSet::NuclearBall { radius: 1.0 };
        let mut cfg = SolverConfig::new(0.0, 0.1, 0.5, 1, w, fixed(16));
        assert!(solve(&sinc2(), 2.0, &half_cube(), &cfg).is_err());
        cfg.unregularized = true;
        assert!(solve(&sinc2(), 2.0, &half_cube(), &cfg).is_ok());
        cfg.iterations = 0;
        assert!(solve(&sinc2(), 2.0, &half_cube(), &cfg).is_err());
    }
}
