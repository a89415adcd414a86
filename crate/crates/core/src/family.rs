//! Finite collections of Fourier transforms of compactly supported functions.
//!
//! Every member is `ξ ↦ e^{−2πi ξ·x₀} · profile(s ξ)` for a modulation `x₀`
//! and a dilation `s > 0`. Translates and scalings of a member are again
//! members of this form, which keeps [`make_translates`] and
//! [`make_scalings`] closed.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::FrequencyDomain;
use crate::error::{Error, Result};
use crate::quadrature::NodeSet;

/// Coordinates in `Cⁿ`, one entry per family member.
pub type ComplexVector = DVector<Complex64>;

/// Normalized sinc, `sin(πx)/(πx)`, exactly zero at nonzero integers.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else if x.fract() == 0.0 {
        0.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// `e^{−2πi t}`
#[inline]
pub(crate) fn cis_neg(t: f64) -> Complex64 {
    let (s, c) = (2.0 * PI * t).sin_cos();
    Complex64::new(c, -s)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    /// Indicator of the unit cube `[0,1]^d`.
    BoxIndicator,
}

/// Samples `a(q)`, `q ∈ {0..N−1}^d`, stored row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteData {
    pub dim: usize,
    pub side: usize,
    pub coeffs: Vec<Complex64>,
    pub spacing: f64,
    pub kernel: Kernel,
}

impl DiscreteData {
    pub fn new(dim: usize, side: usize, coeffs: Vec<Complex64>, spacing: f64) -> Result<Self> {
        if dim == 0 || side == 0 {
            return Err(Error::param("discrete data", "dimension and side must be positive"));
        }
        let expected = side.pow(dim as u32);
        if coeffs.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: coeffs.len(),
            });
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param("spacing", format!("must be positive, got {spacing}")));
        }
        Ok(Self {
            dim,
            side,
            coeffs,
            spacing,
            kernel: Kernel::BoxIndicator,
        })
    }

    /// Real image `N×N` interpolated onto the unit square with `Δx = 1/N`.
    pub fn from_image(side: usize, pixels: &[f64]) -> Result<Self> {
        let coeffs = pixels.iter().map(|&p| Complex64::new(p, 0.0)).collect();
        Self::new(2, side, coeffs, 1.0 / side as f64)
    }

    /// `Δx^d Π_k e^{−πiΔxξ_k} sinc(Δxξ_k)`: transform of the scaled box kernel.
    fn kernel_hat(&self, xi: &[f64]) -> Complex64 {
        match self.kernel {
            Kernel::BoxIndicator => xi.iter().fold(Complex64::new(1.0, 0.0), |acc, &x| {
                let t = self.spacing * x;
                acc * cis_neg(0.5 * t) * (self.spacing * sinc(t))
            }),
        }
    }

    fn eval(&self, xi: &[f64]) -> Complex64 {
        let phases: Vec<Complex64> = xi.iter().map(|&x| cis_neg(self.spacing * x)).collect();
        self.kernel_hat(xi) * horner(&self.coeffs, self.side, &phases)
    }
}

/// Nested Horner evaluation of `Σ_q a(q) Π_k z_k^{q_k}`.
fn horner(coeffs: &[Complex64], side: usize, z: &[Complex64]) -> Complex64 {
    if z.len() == 1 {
        return coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z[0] + a);
    }
    let stride = coeffs.len() / side;
    (0..side).rev().fold(Complex64::new(0.0, 0.0), |acc, q| {
        acc * z[0] + horner(&coeffs[q * stride..(q + 1) * stride], side, &z[1..])
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `Π_k sinc(ξ_k)^power`
    SincPower { power: u32 },
    /// Transform of the indicator of `[0,1]^d + shift`.
    IndicatorBox { shift: Vec<f64> },
    /// Box-kernel interpolant of discrete samples.
    DiscreteInterpolant(DiscreteData),
}

impl Profile {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        match self {
            Profile::SincPower { power } => {
                let v: f64 = xi.iter().map(|&x| sinc(x).powi(*power as i32)).product();
                Complex64::new(v, 0.0)
            }
            Profile::IndicatorBox { shift } => xi.iter().zip(shift).fold(Complex64::new(1.0, 0.0), |acc, (&x, &s)| {
                acc * cis_neg(x * (s + 0.5)) * sinc(x)
            }),
            Profile::DiscreteInterpolant(data) => data.eval(xi),
        }
    }

    fn dim_hint(&self) -> Option<usize> {
        match self {
            Profile::SincPower { .. } => None,
            Profile::IndicatorBox { shift } => Some(shift.len()),
            Profile::DiscreteInterpolant(d) => Some(d.dim),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSpec {
    #[serde(flatten)]
    pub profile: Profile,
    /// Translation `x₀`, applied as the phase `e^{−2πiξ·x₀}`.
    #[serde(default)]
    pub modulation: Vec<f64>,
    /// Scale `s` in `profile(s ξ)`.
    #[serde(default = "unit")]
    pub dilation: f64,
}

fn unit() -> f64 {
    1.0
}

impl MemberSpec {
    pub fn new(profile: Profile, dim: usize) -> Self {
        Self {
            profile,
            modulation: vec![0.0; dim],
            dilation: 1.0,
        }
    }

    pub fn sinc_power(power: u32, dim: usize) -> Self {
        Self::new(Profile::SincPower { power }, dim)
    }

    pub fn discrete(data: DiscreteData) -> Self {
        let dim = data.dim;
        Self::new(Profile::DiscreteInterpolant(data), dim)
    }

    pub fn with_modulation(mut self, x0: Vec<f64>) -> Self {
        self.modulation = x0;
        self
    }

    pub fn with_dilation(mut self, s: f64) -> Self {
        self.dilation = s;
        self
    }

    pub fn dim(&self) -> usize {
        self.modulation.len()
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let phase: f64 = xi.iter().zip(&self.modulation).map(|(x, m)| x * m).sum();
        let mut scaled = [0.0f64; 8];
        let value = if self.dilation == 1.0 {
            self.profile.eval(xi)
        } else if xi.len() <= scaled.len() {
            for (s, x) in scaled.iter_mut().zip(xi) {
                *s = x * self.dilation;
            }
            self.profile.eval(&scaled[..xi.len()])
        } else {
            let v: Vec<f64> = xi.iter().map(|x| x * self.dilation).collect();
            self.profile.eval(&v)
        };
        if phase == 0.0 {
            value
        } else {
            cis_neg(phase) * value
        }
    }

    fn validate(&self) -> Result<()> {
        if self.modulation.is_empty() {
            return Err(Error::param("modulation", "member dimension must be positive"));
        }
        if let Some(d) = self.profile.dim_hint() {
            if d != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    got: d,
                });
            }
        }
        if !(self.dilation.is_finite() && self.dilation > 0.0) {
            return Err(Error::param(
                "dilation",
                format!("must be positive, got {}", self.dilation),
            ));
        }
        if self.modulation.iter().any(|m| !m.is_finite()) {
            return Err(Error::param("modulation", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionFamily {
    members: Vec<MemberSpec>,
}

impl FunctionFamily {
    /// Linear independence of the members is the caller's responsibility;
    /// see [`crate::gram::rank_diagnostic`].
    pub fn new(members: Vec<MemberSpec>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::param("members", "family must have at least one member"))?;
        let dim = first.dim();
        for (i, m) in members.iter().enumerate() {
            m.validate()?;
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: m.dim(),
                });
            }
            if members[..i].contains(m) {
                return Err(Error::param(
                    "members",
                    format!("member {i} duplicates an earlier member"),
                ));
            }
        }
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.members[0].dim()
    }

    pub fn members(&self) -> &[MemberSpec] {
        &self.members
    }

    /// `(f_1(ξ), …, f_n(ξ))`
    pub fn eval(&self, xi: &[f64]) -> ComplexVector {
        let mut out = DVector::zeros(self.len());
        self.eval_into(xi, out.as_mut_slice());
        out
    }

    pub fn eval_into(&self, xi: &[f64], out: &mut [Complex64]) {
        for (o, m) in out.iter_mut().zip(&self.members) {
            *o = m.eval(xi);
        }
    }

    /// `(f_1(αξ), …, f_n(αξ))`
    pub fn eval_dilated(&self, alpha: f64, xi: &[f64]) -> ComplexVector {
        let scaled: Vec<f64> = xi.iter().map(|x| alpha * x).collect();
        self.eval(&scaled)
    }

    /// Evaluates `f` and `D_α f` at every node, in parallel.
    pub fn sample(&self, alpha: f64, nodes: &NodeSet) -> FamilySamples {
        let n = self.len();
        let d = nodes.dim();
        let mut values = vec![Complex64::new(0.0, 0.0); n * nodes.len()];
        let mut dilated = values.clone();
        values
            .par_chunks_mut(n)
            .zip(dilated.par_chunks_mut(n))
            .enumerate()
            .for_each(|(i, (v, w))| {
                let xi = nodes.get(i);
                self.eval_into(xi, v);
                let mut scaled = vec![0.0; d];
                for (s, x) in scaled.iter_mut().zip(xi) {
                    *s = alpha * x;
                }
                self.eval_into(&scaled, w);
            });
        FamilySamples { n, values, dilated }
    }

    /// Minimum of `Σ_k |f_k(ξ)|²` over a tensor grid (endpoints included) of
    /// the bounding box, restricted to the domain. Zero signals a common zero.
    pub fn min_abs_sq_on_domain(&self, domain: &FrequencyDomain, resolution: usize) -> Result<f64> {
        if resolution < 2 {
            return Err(Error::param("grid_resolution", "must be at least 2"));
        }
        if domain.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: domain.dim(),
            });
        }
        let (lo, hi) = domain.bounding_box();
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| {
                (0..resolution)
                    .map(|i| a + (b - a) * i as f64 / (resolution - 1) as f64)
                    .collect()
            })
            .collect();
        let grid = NodeSet::tensor(&axes);
        let min = (0..grid.len())
            .into_par_iter()
            .filter(|&i| domain.contains_unchecked(grid.get(i)))
            .map(|i| {
                let xi = grid.get(i);
                self.members.iter().map(|m| m.eval(xi).norm_sqr()).sum::<f64>()
            })
            .reduce_with(f64::min);
        min.ok_or(Error::EmptyDomain)
    }
}

/// `f(ξ_i)` and `f(αξ_i)` for a node set, node-major (`n` values per node).
#[derive(Clone, Debug)]
pub struct FamilySamples {
    n: usize,
    values: Vec<Complex64>,
    dilated: Vec<Complex64>,
}

impl FamilySamples {
    pub fn members(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> usize {
        self.values.len().checked_div(self.n).unwrap_or(0)
    }

    pub fn at(&self, i: usize) -> &[Complex64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn dilated_at(&self, i: usize) -> &[Complex64] {
        &self.dilated[i * self.n..(i + 1) * self.n]
    }
}

/// The family `{base, base·e^{−2πiξ·x_1}, …}`.
pub fn make_translates(base: MemberSpec, offsets: &[Vec<f64>]) -> Result<FunctionFamily> {
    let dim = base.dim();
    for (i, x) in offsets.iter().enumerate() {
        if x.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: x.len(),
            });
        }
        if offsets[..i].contains(x) {
            return Err(Error::DuplicateOffset(x.clone()));
        }
    }
    let mut members = vec![base.clone()];
    members.extend(offsets.iter().map(|x| {
        let mut m = base.clone();
        for (a, b) in m.modulation.iter_mut().zip(x) {
            *a += b;
        }
        m
    }));
    FunctionFamily::new(members)
}

/// The family `{base(α^{−k} ξ) : k = 0..count}`.
pub fn make_scalings(base: MemberSpec, alpha: f64, count: usize) -> Result<FunctionFamily> {
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::param("alpha", format!("must exceed 1, got {alpha}")));
    }
    let members = (0..count)
        .map(|k| {
            let s = alpha.powi(-(k as i32));
            let mut m = base.clone();
            m.dilation *= s;
            for x in &mut m.modulation {
                *x *= s;
            }
            m
        })
        .collect();
    FunctionFamily::new(members)
}
