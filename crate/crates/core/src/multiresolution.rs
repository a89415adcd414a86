//! Refinable functions from multipliers: the cascade product
//! `φ̂_J(ξ) = Π_{j=1..J} m(2^{−j}ξ)`, its periodization, and wavelet masks.

use std::f64::consts::PI;
use std::sync::Arc;

use log::warn;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::extrapolation::{GridField, GridGeometry};
use crate::multiplier::{FrequencyMap, SharedMap};

/// `Π_k ((1 + e^{2πiξ_k})/2)^N`
pub fn boundary_window(xi: &[f64], order: u32) -> Complex64 {
    xi.iter()
        .map(|&x| {
            let half = (Complex64::new(1.0, 0.0) + Complex64::from_polar(1.0, 2.0 * PI * x)) * 0.5;
            half.powu(order)
        })
        .product()
}

/// `ξ ↦ w_N(ξ)·m(ξ)`
#[derive(Clone, Debug)]
pub struct Windowed<M> {
    inner: M,
    order: u32,
}

pub fn apply_boundary_window<M: FrequencyMap>(m: M, order: u32) -> Windowed<M> {
    Windowed { inner: m, order }
}

impl<M: FrequencyMap> FrequencyMap for Windowed<M> {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        if self.order == 0 {
            return self.inner.eval(xi);
        }
        boundary_window(xi, self.order) * self.inner.eval(xi)
    }

    fn floor_events(&self) -> usize {
        self.inner.floor_events()
    }
}

/// `ξ ↦ 2^p·m(ξ)`
#[derive(Clone, Debug)]
pub struct Rescaled<M> {
    inner: M,
    factor: f64,
}

/// `p` is signed: a mask with `lim_{ξ→0} m(ξ) = 2^q` is normalized by `p = −q`.
pub fn rescale_mask<M: FrequencyMap>(m: M, p: i32) -> Rescaled<M> {
    Rescaled {
        inner: m,
        factor: 2f64.powi(p),
    }
}

impl<M: FrequencyMap> FrequencyMap for Rescaled<M> {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        self.inner.eval(xi) * self.factor
    }

    fn floor_events(&self) -> usize {
        self.inner.floor_events()
    }
}

/// `frac(ξ + 1/2) − 1/2`, in `[−1/2, 1/2)`.
pub fn wrap(x: f64) -> f64 {
    x - (x + 0.5).floor()
}

#[derive(Clone)]
enum MaskSource {
    Exact(SharedMap),
    /// `resolution^d` samples at `−1/2 + j/resolution`, last axis fastest.
    Sampled {
        resolution: usize,
        values: Vec<Complex64>,
    },
}

/// A 1-periodic function on `R^d`, evaluated through its restriction to
/// `[−1/2, 1/2)^d`.
#[derive(Clone)]
pub struct PeriodicMask {
    dim: usize,
    source: MaskSource,
}

impl std::fmt::Debug for PeriodicMask {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match &self.source {
            MaskSource::Exact(_) => "exact".to_string(),
            MaskSource::Sampled { resolution, .. } => format!("sampled({resolution})"),
        };
        f.debug_struct("PeriodicMask")
            .field("dim", &self.dim)
            .field("source", &kind)
            .finish()
    }
}

impl PeriodicMask {
    /// Wraps a callable; no interpolation.
    pub fn exact(m: SharedMap, dim: usize) -> Self {
        Self {
            dim,
            source: MaskSource::Exact(m),
        }
    }

    pub fn from_fn<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
    {
        Self::exact(Arc::new(f), dim)
    }

    pub fn constant(dim: usize, value: Complex64) -> Self {
        Self::from_fn(dim, move |_| value)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.source, MaskSource::Exact(_))
    }

    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        let wrapped: Vec<f64> = xi.iter().map(|&x| wrap(x)).collect();
        match &self.source {
            MaskSource::Exact(m) => m.eval(&wrapped),
            MaskSource::Sampled { resolution, values } => periodic_interp(values, *resolution, &wrapped),
        }
    }
}

impl FrequencyMap for PeriodicMask {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        PeriodicMask::eval(self, xi)
    }

    fn floor_events(&self) -> usize {
        match &self.source {
            MaskSource::Exact(m) => m.floor_events(),
            MaskSource::Sampled { .. } => 0,
        }
    }
}

fn periodic_interp(values: &[Complex64], r: usize, wrapped: &[f64]) -> Complex64 {
    let d = wrapped.len();
    let mut lo = vec![0usize; d];
    let mut frac = vec![0.0; d];
    for k in 0..d {
        let t = (wrapped[k] + 0.5) * r as f64;
        let i0 = t.floor();
        frac[k] = t - i0;
        lo[k] = (i0 as usize) % r;
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut idx = 0usize;
        for k in 0..d {
            let (i, wk) = if corner >> k & 1 == 1 {
                ((lo[k] + 1) % r, frac[k])
            } else {
                (lo[k], 1.0 - frac[k])
            };
            w *= wk;
            idx = idx * r + i;
        }
        if w != 0.0 {
            acc += values[idx] * w;
        }
    }
    acc
}

/// Samples `m` on `resolution` points per axis over `[−1/2, 1/2)^d`; the
/// result interpolates linearly and wraps periodically.
pub fn periodize_mask(m: &dyn FrequencyMap, dim: usize, resolution: usize) -> Result<PeriodicMask> {
    if resolution < 2 {
        return Err(Error::param("resolution", "must be at least 2"));
    }
    let total = resolution.pow(dim as u32);
    let values = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut xi = vec![0.0; dim];
            let mut rem = flat;
            for k in (0..dim).rev() {
                xi[k] = -0.5 + (rem % resolution) as f64 / resolution as f64;
                rem /= resolution;
            }
            m.eval(&xi)
        })
        .collect();
    Ok(PeriodicMask {
        dim,
        source: MaskSource::Sampled { resolution, values },
    })
}

/// Partial cascade product on a grid, with the mask kept for exact
/// evaluation anywhere.
#[derive(Clone, Debug)]
pub struct CascadeResult {
    pub grid: GridField,
    pub products: usize,
    /// Factors that evaluated to exactly zero, e.g. floored multiplier values.
    pub zero_set_hits: usize,
    /// `sup_grid |φ̂_j − φ̂_{j−1}|` for `j = 1..=J`.
    pub increments: Vec<f64>,
    mask: PeriodicMask,
}

impl CascadeResult {
    pub fn mask(&self) -> &PeriodicMask {
        &self.mask
    }

    /// `Π_{j=1..J} m(2^{−j}ξ)` at any `ξ`.
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        cascade_product(&self.mask, self.products, xi)
    }

    /// The last Cauchy increment.
    pub fn increment(&self) -> f64 {
        self.increments.last().copied().unwrap_or(0.0)
    }
}

impl FrequencyMap for CascadeResult {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        CascadeResult::eval(self, xi)
    }
}

fn cascade_product(mask: &PeriodicMask, products: usize, xi: &[f64]) -> Complex64 {
    let mut scaled = xi.to_vec();
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..products {
        scaled.iter_mut().for_each(|x| *x *= 0.5);
        acc *= mask.eval(&scaled);
    }
    acc
}

pub fn cascade(mask: &PeriodicMask, products: usize, grid: &GridGeometry) -> Result<CascadeResult> {
    if products == 0 {
        return Err(Error::param("products", "must be at least 1"));
    }
    if grid.dim() != mask.dim() {
        return Err(Error::DimensionMismatch {
            expected: mask.dim(),
            got: grid.dim(),
        });
    }
    let at_zero = mask.eval(&vec![0.0; mask.dim()]);
    if (at_zero - 1.0).norm() > 1e-8 {
        warn!("cascade mask has m(0) = {at_zero}, the product will not converge to a refinable function");
    }
    struct NodeResult {
        value: Complex64,
        hits: usize,
        increments: Vec<f64>,
    }
    let per_node: Vec<Result<NodeResult>> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let xi = grid.node(i);
            let mut scaled = xi.clone();
            let mut acc = Complex64::new(1.0, 0.0);
            let mut hits = 0;
            let mut increments = Vec::with_capacity(products);
            for _ in 0..products {
                scaled.iter_mut().for_each(|x| *x *= 0.5);
                let factor = mask.eval(&scaled);
                if !(factor.re.is_finite() && factor.im.is_finite()) {
                    return Err(Error::NonFinite {
                        node: scaled,
                        value: factor.to_string(),
                    });
                }
                if factor == Complex64::new(0.0, 0.0) {
                    hits += 1;
                }
                let next = acc * factor;
                increments.push((next - acc).norm());
                acc = next;
            }
            Ok(NodeResult {
                value: acc,
                hits,
                increments,
            })
        })
        .collect();
    let mut values = Vec::with_capacity(grid.len());
    let mut hits = 0;
    let mut increments = vec![0.0f64; products];
    for r in per_node {
        let r = r?;
        values.push(r.value);
        hits += r.hits;
        for (sup, inc) in increments.iter_mut().zip(&r.increments) {
            *sup = sup.max(*inc);
        }
    }
    Ok(CascadeResult {
        grid: GridField::new(grid.clone(), values)?,
        products,
        zero_set_hits: hits,
        increments,
        mask: mask.clone(),
    })
}

/// The cascade window used by the one-dimensional pipelines: `[−8, 8)` with
/// `2¹³` nodes.
pub fn default_cascade_grid() -> GridGeometry {
    GridGeometry::new(vec![8192], vec![16.0 / 8192.0], vec![-8.0]).expect("static grid is valid")
}

/// Integer shifts `k ∈ Z^d` with `|k_i| ≤ half`.
fn shifts(dim: usize, half: i64) -> Vec<Vec<f64>> {
    let side = (2 * half + 1) as usize;
    (0..side.pow(dim as u32))
        .map(|flat| {
            let mut k = vec![0.0; dim];
            let mut rem = flat;
            for slot in k.iter_mut().rev() {
                *slot = ((rem % side) as i64 - half) as f64;
                rem /= side;
            }
            k
        })
        .collect()
}

fn check_terms(terms: usize) -> Result<i64> {
    if terms.is_multiple_of(2) {
        return Err(Error::param("terms", format!("must be odd, got {terms}")));
    }
    Ok(((terms - 1) / 2) as i64)
}

/// `Φ(ξ) = Σ_{|k|≤(K−1)/2} |φ̂(ξ+k)|²` sampled at `resolution` points per
/// axis on `[−1/2, 1/2)`, using the cascade's exact evaluation.
pub fn periodization_phi(phi: &CascadeResult, terms: usize, resolution: usize) -> Result<PeriodicMask> {
    let half = check_terms(terms)?;
    let dim = phi.grid.dim();
    let ks = shifts(dim, half);
    let sum = move |xi: &[f64]| -> Complex64 {
        let total: f64 = ks
            .iter()
            .map(|k| {
                let p: Vec<f64> = xi.iter().zip(k).map(|(x, s)| x + s).collect();
                phi.eval(&p).norm_sqr()
            })
            .sum();
        Complex64::new(total, 0.0)
    };
    periodize_mask(&sum, dim, resolution)
}

/// Periodization from grid samples only. The grid must contain every shift
/// `ξ + k` of its own nodes in `[−1/2, 1/2)`.
pub fn periodization_phi_grid(phi: &GridField, terms: usize) -> Result<GridField> {
    let half = check_terms(terms)?;
    let dim = phi.dim();
    let reach = half as f64 + 0.5;
    let need_lo = vec![-reach; dim];
    let need_hi = vec![reach - 1e-12; dim];
    if !phi.geometry.covers(&need_lo, &need_hi) {
        return Err(Error::Coverage(format!(
            "{terms} periodization terms need the grid to span ±{reach}, it spans [{:?}, {:?}]",
            phi.geometry.lo(),
            phi.geometry.hi()
        )));
    }
    let ks = shifts(dim, half);
    let values: Result<Vec<Complex64>> = (0..phi.len())
        .into_par_iter()
        .map(|i| {
            let xi = phi.geometry.node(i);
            if xi.iter().any(|x| *x < -0.5 || *x >= 0.5) {
                return Ok(Complex64::new(0.0, 0.0));
            }
            let mut total = 0.0;
            for k in &ks {
                let p: Vec<f64> = xi.iter().zip(k).map(|(x, s)| x + s).collect();
                let v = phi
                    .interpolate(&p)
                    .ok_or_else(|| Error::Coverage(format!("shifted node {p:?} is off the grid")))?;
                total += v.norm_sqr();
            }
            Ok(Complex64::new(total, 0.0))
        })
        .collect();
    GridField::new(phi.geometry.clone(), values?)
}

/// `g(ξ) = conj(m(ξ+1/2))·Φ(ξ+1/2)·e^{−2πiξ}`; one dimension only.
pub fn wavelet_mask(m: &PeriodicMask, phi: &PeriodicMask) -> Result<PeriodicMask> {
    if m.dim() != 1 || phi.dim() != 1 {
        return Err(Error::param("dim", "wavelet masks are built in one dimension only"));
    }
    let (m, phi) = (m.clone(), phi.clone());
    Ok(PeriodicMask::from_fn(1, move |xi: &[f64]| {
        let shifted = [xi[0] + 0.5];
        m.eval(&shifted).conj() * phi.eval(&shifted) * Complex64::from_polar(1.0, -2.0 * PI * xi[0])
    }))
}

/// `ψ̂(ξ) = g(ξ/2)·φ̂(ξ/2)` on `grid`.
pub fn wavelet_hat(g: &PeriodicMask, phi: &CascadeResult, grid: &GridGeometry) -> Result<GridField> {
    if grid.dim() != g.dim() || grid.dim() != phi.grid.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            got: grid.dim(),
        });
    }
    Ok(GridField::from_fn(grid.clone(), |xi| {
        let half: Vec<f64> = xi.iter().map(|x| 0.5 * x).collect();
        g.eval(&half) * phi.eval(&half)
    }))
}

/// Least-squares slope of `log max_{|ξ|∈[k,k+1)} |f(ξ)|` against
/// `log(k + 1/2)` for unit intervals in `[lo, hi)`, sampling both signs of
/// `ξ` at `samples_per_unit` points per interval.
pub fn decay_slope<F: Fn(f64) -> f64>(f: F, lo: usize, hi: usize, samples_per_unit: usize) -> Result<f64> {
    if hi <= lo + 1 || samples_per_unit == 0 {
        return Err(Error::param(
            "range",
            "need at least two unit intervals and one sample each",
        ));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in lo..hi {
        let mut peak: f64 = 0.0;
        for s in 0..samples_per_unit {
            let x = k as f64 + s as f64 / samples_per_unit as f64;
            peak = peak.max(f(x).abs()).max(f(-x).abs());
        }
        if peak <= 0.0 {
            return Err(Error::param("f", format!("vanishes on [{k}, {})", k + 1)));
        }
        xs.push((k as f64 + 0.5).ln());
        ys.push(peak.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
