//! Σ-multipliers `m_Σ(ξ) = ⟨f(ξ), M f(αξ)⟩ / ⟨f(ξ), M f(ξ)⟩` with `M = δI + Σ`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::domain::FrequencyDomain;
use crate::error::{Error, Result};
use crate::family::FunctionFamily;
use crate::hermitian::HermitianMatrix;
use crate::quadrature::NodeSet;

/// Default relative denominator floor.
pub const RELATIVE_FLOOR: f64 = 1e-14;

/// A complex-valued function of frequency.
pub trait FrequencyMap: Send + Sync {
    fn eval(&self, xi: &[f64]) -> Complex64;

    /// Running count of floored evaluations, for maps that have a floor.
    fn floor_events(&self) -> usize {
        0
    }
}

impl<F> FrequencyMap for F
where
    F: Fn(&[f64]) -> Complex64 + Send + Sync,
{
    fn eval(&self, xi: &[f64]) -> Complex64 {
        self(xi)
    }
}

/// Shared, type-erased frequency map.
pub type SharedMap = Arc<dyn FrequencyMap>;

pub struct SigmaMultiplier {
    family: FunctionFamily,
    alpha: f64,
    sigma: HermitianMatrix,
    delta: f64,
    metric: HermitianMatrix,
    floor: f64,
    floor_events: AtomicUsize,
}

impl Clone for SigmaMultiplier {
    fn clone(&self) -> Self {
        Self {
            family: self.family.clone(),
            alpha: self.alpha,
            sigma: self.sigma.clone(),
            delta: self.delta,
            metric: self.metric.clone(),
            floor: self.floor,
            floor_events: AtomicUsize::new(self.floor_events()),
        }
    }
}

impl std::fmt::Debug for SigmaMultiplier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SigmaMultiplier")
            .field("n", &self.family.len())
            .field("alpha", &self.alpha)
            .field("delta", &self.delta)
            .field("floor", &self.floor)
            .finish()
    }
}

impl SigmaMultiplier {
    /// `sigma` must be positive semidefinite up to `1e−10·‖Σ‖_F`.
    pub fn new(family: FunctionFamily, alpha: f64, sigma: HermitianMatrix, delta: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::param("alpha", format!("must exceed 1, got {alpha}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::param("delta", format!("must be nonnegative, got {delta}")));
        }
        if sigma.size() != family.len() {
            return Err(Error::DimensionMismatch {
                expected: family.len(),
                got: sigma.size(),
            });
        }
        let lam_min = sigma.min_eigenvalue()?;
        if lam_min < -1e-10 * sigma.frobenius_norm() {
            return Err(Error::param(
                "sigma",
                format!("must be positive semidefinite, smallest eigenvalue {lam_min:e}"),
            ));
        }
        let metric = sigma.shifted(delta);
        Ok(Self {
            family,
            alpha,
            sigma,
            delta,
            metric,
            floor: 0.0,
            floor_events: AtomicUsize::new(0),
        })
    }

    /// The trace multiplier: `Σ = I`, `δ = 0`.
    pub fn trace(family: FunctionFamily, alpha: f64) -> Result<Self> {
        let n = family.len();
        Self::new(family, alpha, HermitianMatrix::identity(n), 0.0)
    }

    /// Absolute floor: denominators `≤ eps` evaluate to 0.
    pub fn with_floor(mut self, eps: f64) -> Self {
        self.floor = eps.max(0.0);
        self
    }

    /// Floor at `RELATIVE_FLOOR` times the largest denominator on a tensor
    /// probe grid of `domain`.
    pub fn with_probe_floor(self, domain: &FrequencyDomain, resolution: usize) -> Result<Self> {
        let rule = crate::quadrature::tensor_rule(domain, resolution)?;
        let max = self.max_denominator(rule.nodes());
        Ok(self.with_floor(RELATIVE_FLOOR * max))
    }

    pub fn max_denominator(&self, nodes: &NodeSet) -> f64 {
        (0..nodes.len())
            .into_par_iter()
            .map(|i| {
                let v = self.family.eval(nodes.get(i));
                self.denominator(v.as_slice())
            })
            .reduce(|| 0.0, f64::max)
    }

    pub fn family(&self) -> &FunctionFamily {
        &self.family
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> &HermitianMatrix {
        &self.sigma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Number of evaluations that hit the denominator floor so far.
    pub fn floor_events(&self) -> usize {
        self.floor_events.load(Ordering::Relaxed)
    }

    pub fn reset_floor_events(&self) {
        self.floor_events.store(0, Ordering::Relaxed);
    }

    /// `‖v‖²_M`
    pub fn denominator(&self, v: &[Complex64]) -> f64 {
        self.metric.sesquilinear(v, v).re
    }

    /// Multiplier value from `v = f(ξ)` and `w = f(αξ)`; `None` when floored.
    /// Does not touch the floor counter.
    pub fn eval_pair(&self, v: &[Complex64], w: &[Complex64]) -> Option<Complex64> {
        let den = self.denominator(v);
        if den <= self.floor || !den.is_finite() {
            None
        } else {
            Some(self.metric.sesquilinear(v, w) / den)
        }
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let v = self.family.eval(xi);
        let w = self.family.eval_dilated(self.alpha, xi);
        match self.eval_pair(v.as_slice(), w.as_slice()) {
            Some(m) => m,
            None => {
                self.floor_events.fetch_add(1, Ordering::Relaxed);
                Complex64::new(0.0, 0.0)
            }
        }
    }

    pub fn eval_on_nodes(&self, nodes: &NodeSet) -> Vec<Complex64> {
        (0..nodes.len())
            .into_par_iter()
            .map(|i| self.eval(nodes.get(i)))
            .collect()
    }
}

impl FrequencyMap for SigmaMultiplier {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        SigmaMultiplier::eval(self, xi)
    }

    fn floor_events(&self) -> usize {
        SigmaMultiplier::floor_events(self)
    }
}

/// `Σ_i conj(f_i(ξ)) f_i(αξ) / Σ_i |f_i(ξ)|²`, or 0 where the family vanishes.
pub fn trace_multiplier(family: &FunctionFamily, alpha: f64, xi: &[f64]) -> Complex64 {
    let v = family.eval(xi);
    let w = family.eval_dilated(alpha, xi);
    let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    if den <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum::<Complex64>() / den
}
