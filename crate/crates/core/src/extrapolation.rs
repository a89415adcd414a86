//! Frequency-domain fields on regular grids, multiplier extrapolation from
//! `Ω₀` to `αΩ₀`, spatial synthesis and the Gerchberg–Papoulis baseline.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::domain::FrequencyDomain;
use crate::error::{Error, Result};
use crate::family::FunctionFamily;
use crate::multiplier::FrequencyMap;
use crate::quadrature::NodeSet;

const COVER_SLACK: f64 = 1e-9;

/// Node-centered grid `origin + j·spacing`, `j ∈ Π [0, shape_k)`, flattened
/// row-major with the last axis fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct GridGeometry {
    pub shape: Vec<usize>,
    pub spacing: Vec<f64>,
    pub origin: Vec<f64>,
}

impl GridGeometry {
    pub fn new(shape: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        if shape.is_empty() {
            return Err(Error::param("shape", "grid needs at least one axis"));
        }
        if spacing.len() != shape.len() || origin.len() != shape.len() {
            return Err(Error::DimensionMismatch {
                expected: shape.len(),
                got: if spacing.len() != shape.len() {
                    spacing.len()
                } else {
                    origin.len()
                },
            });
        }
        if shape.contains(&0) {
            return Err(Error::param("shape", "entries must be at least 1"));
        }
        if spacing.iter().any(|h| !(h.is_finite() && *h > 0.0)) {
            return Err(Error::param("spacing", "entries must be positive"));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::param("origin", "entries must be finite"));
        }
        Ok(Self { shape, spacing, origin })
    }

    /// `points` nodes per axis on `[−w, w]`, endpoints included.
    pub fn symmetric(dim: usize, points: usize, half_width: f64) -> Result<Self> {
        if points < 2 {
            return Err(Error::param("points", "must be at least 2"));
        }
        let h = 2.0 * half_width / (points - 1) as f64;
        Self::new(vec![points; dim], vec![h; dim], vec![-half_width; dim])
    }

    /// FFT-compatible grid `ξ_k = (k − N/2)·spacing` with `N` even.
    pub fn fft(dim: usize, points: usize, spacing: f64) -> Result<Self> {
        if points < 2 || !points.is_multiple_of(2) {
            return Err(Error::param(
                "points",
                format!("must be even and at least 2, got {points}"),
            ));
        }
        let origin = -((points / 2) as f64) * spacing;
        Self::new(vec![points; dim], vec![spacing; dim], vec![origin; dim])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn lo(&self) -> Vec<f64> {
        self.origin.clone()
    }

    pub fn hi(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|k| self.origin[k] + (self.shape[k] - 1) as f64 * self.spacing[k])
            .collect()
    }

    pub fn axis(&self, k: usize) -> Vec<f64> {
        (0..self.shape[k])
            .map(|j| self.origin[k] + j as f64 * self.spacing[k])
            .collect()
    }

    pub fn node_into(&self, flat: usize, out: &mut [f64]) {
        let mut rem = flat;
        for k in (0..self.dim()).rev() {
            let j = rem % self.shape[k];
            rem /= self.shape[k];
            out[k] = self.origin[k] + j as f64 * self.spacing[k];
        }
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.node_into(flat, &mut out);
        out
    }

    pub fn nodes(&self) -> NodeSet {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|k| self.axis(k)).collect();
        NodeSet::tensor(&axes)
    }

    /// Whether the grid's box contains `[lo, hi]`.
    pub fn covers(&self, lo: &[f64], hi: &[f64]) -> bool {
        let (glo, ghi) = (self.lo(), self.hi());
        (0..self.dim()).all(|k| {
            let slack = COVER_SLACK * (1.0 + ghi[k].abs().max(glo[k].abs()));
            glo[k] <= lo[k] + slack && ghi[k] >= hi[k] - slack
        })
    }

    fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.shape[k + 1];
        }
        s
    }
}

/// Complex samples on a [`GridGeometry`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub geometry: GridGeometry,
    pub values: Vec<Complex64>,
}

impl GridField {
    pub fn new(geometry: GridGeometry, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::DimensionMismatch {
                expected: geometry.len(),
                got: values.len(),
            });
        }
        Ok(Self { geometry, values })
    }

    pub fn zeros(geometry: GridGeometry) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); geometry.len()];
        Self { geometry, values }
    }

    /// Samples `f` at every node, in parallel.
    pub fn from_fn<F>(geometry: GridGeometry, f: F) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        let values = (0..geometry.len())
            .into_par_iter()
            .map_init(
                || vec![0.0; geometry.dim()],
                |xi, i| {
                    geometry.node_into(i, xi);
                    f(xi)
                },
            )
            .collect();
        Self { geometry, values }
    }

    pub fn dim(&self) -> usize {
        self.geometry.dim()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<F: Fn(&[f64], Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        let g = &self.geometry;
        let values = self
            .values
            .par_iter()
            .enumerate()
            .map(|(i, &v)| f(&g.node(i), v))
            .collect();
        Self {
            geometry: g.clone(),
            values,
        }
    }

    /// Zero outside `region`.
    pub fn restrict(&self, region: &FrequencyDomain) -> Result<Self> {
        self.check_region(region)?;
        Ok(self.map(|xi, v| {
            if region.contains_unchecked(xi) {
                v
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// `a·self + b·other`
    pub fn combine(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x * a + y * b)
            .collect();
        Ok(Self {
            geometry: self.geometry.clone(),
            values,
        })
    }

    /// Multilinear interpolation; `None` outside the grid's box.
    pub fn interpolate(&self, xi: &[f64]) -> Option<Complex64> {
        let g = &self.geometry;
        let d = g.dim();
        let strides = g.strides();
        let mut base = 0usize;
        let mut frac = vec![0.0; d];
        let mut step = vec![0usize; d];
        for k in 0..d {
            let t = (xi[k] - g.origin[k]) / g.spacing[k];
            let last = (g.shape[k] - 1) as f64;
            if t < -COVER_SLACK * (1.0 + last) || t > last * (1.0 + COVER_SLACK) + COVER_SLACK {
                return None;
            }
            let t = t.clamp(0.0, last);
            if g.shape[k] == 1 {
                continue;
            }
            let i0 = (t.floor() as usize).min(g.shape[k] - 2);
            base += i0 * strides[k];
            frac[k] = t - i0 as f64;
            step[k] = strides[k];
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for corner in 0..(1usize << d) {
            let mut w = 1.0;
            let mut idx = base;
            for k in 0..d {
                if corner >> k & 1 == 1 {
                    w *= frac[k];
                    idx += step[k];
                } else {
                    w *= 1.0 - frac[k];
                }
            }
            if w != 0.0 {
                acc += self.values[idx] * w;
            }
        }
        Some(acc)
    }

    /// Largest modulus over the grid.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.geometry != other.geometry {
            return Err(Error::GridMismatch(format!(
                "shapes {:?} and {:?}",
                self.geometry.shape, other.geometry.shape
            )));
        }
        Ok(())
    }

    fn check_region(&self, region: &FrequencyDomain) -> Result<()> {
        if region.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: region.dim(),
            });
        }
        Ok(())
    }
}

/// The known low-frequency data `v` on `Ω₀`.
#[derive(Clone, Debug)]
pub enum LowSource {
    /// `v = Σ c_k f_k`, evaluated exactly.
    Exact {
        family: FunctionFamily,
        coeffs: Vec<Complex64>,
    },
    /// Grid samples, interpolated multilinearly.
    Sampled(GridField),
}

impl LowSource {
    pub fn exact(family: FunctionFamily, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != family.len() {
            return Err(Error::DimensionMismatch {
                expected: family.len(),
                got: coeffs.len(),
            });
        }
        Ok(LowSource::Exact { family, coeffs })
    }

    pub fn dim(&self) -> usize {
        match self {
            LowSource::Exact { family, .. } => family.dim(),
            LowSource::Sampled(field) => field.dim(),
        }
    }

    pub fn value(&self, xi: &[f64]) -> Result<Complex64> {
        match self {
            LowSource::Exact { family, coeffs } => Ok(family.eval(xi).iter().zip(coeffs).map(|(f, c)| f * c).sum()),
            LowSource::Sampled(field) => field
                .interpolate(xi)
                .ok_or_else(|| Error::Coverage(format!("low-frequency grid does not contain {xi:?}"))),
        }
    }
}

/// A multiplier together with the piece of `Ω₀` it was fitted on.
#[derive(Clone, Copy)]
pub struct Piece<'a> {
    pub multiplier: &'a dyn FrequencyMap,
    pub domain: &'a FrequencyDomain,
}

impl<'a> Piece<'a> {
    pub fn new(multiplier: &'a dyn FrequencyMap, domain: &'a FrequencyDomain) -> Self {
        Self { multiplier, domain }
    }
}

/// Fills `target` with
///
/// * `v(ξ)` for `ξ ∈ known`,
/// * `m(ξ/α)·v(ξ/α)` for `ξ ∈ α·piece ∖ known`, using the first piece whose
///   dilate contains `ξ`,
/// * `0` elsewhere.
///
/// Pieces form a hard partition; overlapping pieces resolve by order.
pub fn extrapolate_field(
    pieces: &[Piece<'_>],
    low: &LowSource,
    alpha: f64,
    known: &FrequencyDomain,
    target: &GridGeometry,
) -> Result<GridField> {
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::param("alpha", format!("must exceed 1, got {alpha}")));
    }
    let d = target.dim();
    for dom in pieces.iter().map(|p| p.domain).chain(std::iter::once(known)) {
        if dom.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: dom.dim(),
            });
        }
    }
    if low.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: low.dim(),
        });
    }
    for p in pieces {
        let (lo, hi) = p.domain.dilate(alpha)?.bounding_box();
        if !target.covers(&lo, &hi) {
            return Err(Error::Coverage(format!(
                "target grid [{:?}, {:?}] does not cover the dilated domain [{lo:?}, {hi:?}]",
                target.lo(),
                target.hi()
            )));
        }
    }
    let values: Result<Vec<Complex64>> = (0..target.len())
        .into_par_iter()
        .map(|i| {
            let xi = target.node(i);
            if known.contains_unchecked(&xi) {
                return low.value(&xi);
            }
            let shrunk: Vec<f64> = xi.iter().map(|x| x / alpha).collect();
            for p in pieces {
                if p.domain.contains_unchecked(&shrunk) {
                    return Ok(p.multiplier.eval(&shrunk) * low.value(&shrunk)?);
                }
            }
            Ok(Complex64::new(0.0, 0.0))
        })
        .collect();
    GridField::new(target.clone(), values?)
}

/// Single-multiplier form with `known = Ω₀`.
pub fn extrapolate(
    m: &dyn FrequencyMap,
    low: &LowSource,
    alpha: f64,
    omega0: &FrequencyDomain,
    target: &GridGeometry,
) -> Result<GridField> {
    extrapolate_field(&[Piece::new(m, omega0)], low, alpha, omega0, target)
}

/// `new[o, j, i] = Σ_k mat[j, k]·data[o, k, i]` along `axis`.
fn transform_axis(
    data: &[Complex64],
    shape: &[usize],
    axis: usize,
    mat: &[Complex64],
    out_len: usize,
) -> Vec<Complex64> {
    let n_in = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let mut out = vec![Complex64::new(0.0, 0.0); outer * out_len * inner];
    out.par_chunks_mut(inner).enumerate().for_each(|(row, dst)| {
        let o = row / out_len;
        let j = row % out_len;
        let weights = &mat[j * n_in..(j + 1) * n_in];
        for (k, &w) in weights.iter().enumerate() {
            let src = &data[(o * n_in + k) * inner..(o * n_in + k + 1) * inner];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += w * s;
            }
        }
    });
    out
}

/// Inverse Fourier synthesis on `out_shape` points per axis spanning
/// `[lo, hi)`: `u(x) = Σ_ξ field(ξ)·e^{2πiξ·x}·cell_volume`.
pub fn reconstruct_space_box(field: &GridField, lo: &[f64], hi: &[f64], out_shape: &[usize]) -> Result<GridField> {
    let d = field.dim();
    if lo.len() != d || hi.len() != d || out_shape.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: out_shape.len(),
        });
    }
    let spacing: Vec<f64> = (0..d).map(|k| (hi[k] - lo[k]) / out_shape[k] as f64).collect();
    let out_geom = GridGeometry::new(out_shape.to_vec(), spacing, lo.to_vec())?;
    let mut data = field.values.clone();
    let mut shape = field.geometry.shape.clone();
    for axis in 0..d {
        let xi = field.geometry.axis(axis);
        let x = out_geom.axis(axis);
        let h = field.geometry.spacing[axis];
        let mat: Vec<Complex64> = x
            .iter()
            .flat_map(|&xj| xi.iter().map(move |&xk| Complex64::from_polar(h, 2.0 * PI * xk * xj)))
            .collect();
        data = transform_axis(&data, &shape, axis, &mat, x.len());
        shape[axis] = x.len();
    }
    GridField::new(out_geom, data)
}

/// Synthesis on the unit cube, `x_j = j/N` per axis.
pub fn reconstruct_space(field: &GridField, out_shape: &[usize]) -> Result<GridField> {
    let d = field.dim();
    reconstruct_space_box(field, &vec![0.0; d], &vec![1.0; d], out_shape)
}

/// Relative `ℓ²` error over grid nodes in `region`; the absolute norm when
/// the truth vanishes there.
pub fn extrapolation_error(pred: &GridField, truth: &GridField, region: &FrequencyDomain) -> Result<f64> {
    pred.check_same_grid(truth)?;
    pred.check_region(region)?;
    let g = &pred.geometry;
    let (num, den) = (0..g.len())
        .into_par_iter()
        .filter(|&i| region.contains_unchecked(&g.node(i)))
        .map(|i| {
            (
                (pred.values[i] - truth.values[i]).norm_sqr(),
                truth.values[i].norm_sqr(),
            )
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

/// The spatial grid paired with an FFT frequency grid: `x_j = j·Δx`,
/// `Δx = 1/(N·Δξ)`.
pub fn fft_spatial_geometry(freq: &GridGeometry) -> Result<GridGeometry> {
    check_fft_geometry(freq)?;
    let spacing = (0..freq.dim())
        .map(|k| 1.0 / (freq.shape[k] as f64 * freq.spacing[k]))
        .collect();
    GridGeometry::new(freq.shape.clone(), spacing, vec![0.0; freq.dim()])
}

fn check_fft_geometry(g: &GridGeometry) -> Result<()> {
    for k in 0..g.dim() {
        let n = g.shape[k];
        let expected = -((n / 2) as f64) * g.spacing[k];
        if !n.is_multiple_of(2) || (g.origin[k] - expected).abs() > 1e-9 * (1.0 + expected.abs()) {
            return Err(Error::GridMismatch(format!(
                "axis {k}: FFT grids need an even size and origin −N/2·Δξ, got N={n}, origin {}",
                g.origin[k]
            )));
        }
    }
    Ok(())
}

/// In-place FFT along every axis. `inverse` uses `e^{+2πi}` without
/// normalization.
fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let d = shape.len();
    for axis in 0..d {
        let n = shape[axis];
        let fft = if inverse {
            planner.plan_fft_inverse(n)
        } else {
            planner.plan_fft_forward(n)
        };
        let inner: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for o in 0..outer {
            for i in 0..inner {
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[(o * n + k) * inner + i];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[(o * n + k) * inner + i] = *v;
                }
            }
        }
    }
}

/// `(−1)^{Σ j_k}` checkerboard, which shifts the frequency origin to the
/// middle of the grid.
fn checkerboard(data: &mut [Complex64], shape: &[usize]) {
    let d = shape.len();
    for (flat, v) in data.iter_mut().enumerate() {
        let mut rem = flat;
        let mut parity = 0;
        for k in (0..d).rev() {
            parity += rem % shape[k];
            rem /= shape[k];
        }
        if parity % 2 == 1 {
            *v = -*v;
        }
    }
}

/// FFT synthesis `u(x_j) = Σ_k F(ξ_k) e^{2πiξ_k·x_j} Δξ^d` onto
/// [`fft_spatial_geometry`].
pub fn fft_synthesis(field: &GridField) -> Result<GridField> {
    let space = fft_spatial_geometry(&field.geometry)?;
    let mut data = field.values.clone();
    fft_nd(&mut data, &space.shape, true);
    checkerboard(&mut data, &space.shape);
    let scale = field.geometry.cell_volume();
    data.iter_mut().for_each(|v| *v *= scale);
    GridField::new(space, data)
}

/// FFT analysis `F(ξ_k) = Σ_j u(x_j) e^{−2πiξ_k·x_j} Δx^d`, the exact inverse
/// of [`fft_synthesis`].
pub fn fft_analysis(space: &GridField, freq: &GridGeometry) -> Result<GridField> {
    let expected = fft_spatial_geometry(freq)?;
    if expected.shape != space.geometry.shape {
        return Err(Error::GridMismatch(format!(
            "spatial shape {:?} does not match frequency shape {:?}",
            space.geometry.shape, freq.shape
        )));
    }
    let mut data = space.values.clone();
    checkerboard(&mut data, &freq.shape);
    fft_nd(&mut data, &freq.shape, false);
    let scale = expected.cell_volume();
    data.iter_mut().for_each(|v| *v *= scale);
    GridField::new(freq.clone(), data)
}

#[derive(Clone, Debug)]
pub struct GpResult {
    pub field: GridField,
    /// `‖χ_{Ω₀}(v⁽ᵏ⁾ − û)‖₂` for `k = 1..=steps`.
    pub residuals: Vec<f64>,
}

/// Gerchberg–Papoulis: starting from the data zero-extended off `Ω₀`, each
/// step overwrites `Ω₀` with the data, synthesizes, zeroes everything
/// outside the spatial box `[q_lo, q_hi]` and analyzes back.
///
/// `data` must live on an FFT grid (see [`GridGeometry::fft`]); its values
/// outside `Ω₀` are ignored.
pub fn gp_iterate(
    data: &GridField,
    omega0: &FrequencyDomain,
    q_lo: &[f64],
    q_hi: &[f64],
    steps: usize,
) -> Result<GpResult> {
    data.check_region(omega0)?;
    let freq = &data.geometry;
    let space = fft_spatial_geometry(freq)?;
    let d = freq.dim();
    if q_lo.len() != d || q_hi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: q_lo.len(),
        });
    }
    let in_omega: Vec<bool> = (0..freq.len())
        .map(|i| omega0.contains_unchecked(&freq.node(i)))
        .collect();
    let in_q: Vec<bool> = (0..space.len())
        .map(|i| {
            let x = space.node(i);
            (0..d).all(|k| {
                let slack = 1e-12 * (1.0 + q_hi[k].abs());
                x[k] >= q_lo[k] - slack && x[k] <= q_hi[k] + slack
            })
        })
        .collect();
    let zero = Complex64::new(0.0, 0.0);
    let mut v: Vec<Complex64> = data
        .values
        .iter()
        .zip(&in_omega)
        .map(|(&x, &inside)| if inside { x } else { zero })
        .collect();
    let cell = freq.cell_volume();
    let mut residuals = Vec::with_capacity(steps);
    for _ in 0..steps {
        for (vi, (&di, &inside)) in v.iter_mut().zip(data.values.iter().zip(&in_omega)) {
            if inside {
                *vi = di;
            }
        }
        let mut u = fft_synthesis(&GridField::new(freq.clone(), v)?)?;
        for (ui, &keep) in u.values.iter_mut().zip(&in_q) {
            if !keep {
                *ui = zero;
            }
        }
        v = fft_analysis(&u, freq)?.values;
        let r: f64 = v
            .iter()
            .zip(&data.values)
            .zip(&in_omega)
            .filter(|(_, &inside)| inside)
            .map(|((a, b), _)| (a - b).norm_sqr())
            .sum();
        residuals.push((r * cell).sqrt());
    }
    Ok(GpResult {
        field: GridField::new(freq.clone(), v)?,
        residuals,
    })
}

/// Frequency response of the optimal detail filter,
/// `η̂ = χ_{Ω₀ ∖ α⁻¹Ω₀}·m`, on `geometry`.
pub fn optimal_filter_hat(
    m: &dyn FrequencyMap,
    omega0: &FrequencyDomain,
    alpha: f64,
    geometry: &GridGeometry,
) -> Result<GridField> {
    if omega0.dim() != geometry.dim() {
        return Err(Error::DimensionMismatch {
            expected: geometry.dim(),
            got: omega0.dim(),
        });
    }
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(Error::param("alpha", format!("must exceed 1, got {alpha}")));
    }
    Ok(GridField::from_fn(geometry.clone(), |xi| {
        let scaled: Vec<f64> = xi.iter().map(|x| alpha * x).collect();
        if omega0.contains_unchecked(xi) && !omega0.contains_unchecked(&scaled) {
            m.eval(xi)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{sinc, MemberSpec};
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sinc2_low() -> LowSource {
        let fam = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)]).unwrap();
        LowSource::exact(fam, vec![c(1.0)]).unwrap()
    }

    fn mf(xi: &[f64]) -> Complex64 {
        c(sinc(2.0 * xi[0]).powi(2) / sinc(xi[0]).powi(2))
    }

    #[test]
    fn geometry_nodes_and_bounds() {
        let g = GridGeometry::new(vec![2, 3], vec![1.0, 0.5], vec![0.0, -1.0]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.node(0), vec![0.0, -1.0]);
        assert_eq!(g.node(1), vec![0.0, -0.5]);
        assert_eq!(g.node(3), vec![1.0, -1.0]);
        assert_eq!(g.hi(), vec![1.0, 0.0]);
        let nodes = g.nodes();
        for i in 0..g.len() {
            assert_eq!(nodes.get(i), g.node(i).as_slice());
        }
        assert!(GridGeometry::new(vec![0], vec![1.0], vec![0.0]).is_err());
        assert!(GridGeometry::new(vec![2], vec![-1.0], vec![0.0]).is_err());
        assert!(GridGeometry::fft(1, 7, 0.5).is_err());
    }

    #[test]
    fn bilinear_interpolation_is_exact_on_bilinear_functions() {
        let g = GridGeometry::symmetric(2, 5, 1.0).unwrap();
        let f = |x: &[f64]| c(1.0 + 2.0 * x[0] - x[1] + 0.5 * x[0] * x[1]);
        let field = GridField::from_fn(g, f);
        for p in [[0.1, -0.3], [-0.77, 0.9], [1.0, 1.0], [-1.0, 0.25]] {
            assert_abs_diff_eq!((field.interpolate(&p).unwrap() - f(&p)).norm(), 0.0, epsilon = 1e-14);
        }
        assert!(field.interpolate(&[1.1, 0.0]).is_none());
    }

    #[test]
    fn exact_multiplier_reproduces_sinc2() {
        let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
        let target = GridGeometry::symmetric(1, 2049, 1.0).unwrap();
        let out = extrapolate(&mf, &sinc2_low(), 2.0, &omega0, &target).unwrap();
        let truth = GridField::from_fn(target, |xi| c(sinc(xi[0]).powi(2)));
        let err = extrapolation_error(&out, &truth, &FrequencyDomain::cube(1, 1.0).unwrap()).unwrap();
        assert!(err <= 1e-10, "{err}");
    }

    #[test]
    fn zero_multiplier_zero_pads() {
        let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
        let target = GridGeometry::symmetric(1, 101, 1.0).unwrap();
        let zero = |_: &[f64]| c(0.0);
        let out = extrapolate(&zero, &sinc2_low(), 2.0, &omega0, &target).unwrap();
        for i in 0..target.len() {
            let xi = target.node(i);
            let expected = if xi[0].abs() <= 0.5 { sinc(xi[0]).powi(2) } else { 0.0 };
            assert_abs_diff_eq!(out.values[i].re, expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn coverage_is_checked() {
        let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
        let target = GridGeometry::symmetric(1, 11, 0.8).unwrap();
        assert!(matches!(
            extrapolate(&mf, &sinc2_low(), 2.0, &omega0, &target),
            Err(Error::Coverage(_))
        ));
    }

    #[test]
    fn sampled_low_is_linear_and_identity_on_omega0() {
        let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
        let low_grid = GridGeometry::symmetric(1, 257, 0.5).unwrap();
        let a = GridField::from_fn(low_grid.clone(), |xi| c(sinc(xi[0]).powi(2)));
        let b = GridField::from_fn(low_grid, |xi| Complex64::new(xi[0], 1.0));
        let target = GridGeometry::symmetric(1, 201, 1.0).unwrap();
        let ea = extrapolate(&mf, &LowSource::Sampled(a.clone()), 2.0, &omega0, &target).unwrap();
        let eb = extrapolate(&mf, &LowSource::Sampled(b.clone()), 2.0, &omega0, &target).unwrap();
        let mix = LowSource::Sampled(a.combine(2.0, &b, -0.5).unwrap());
        let em = extrapolate(&mf, &mix, 2.0, &omega0, &target).unwrap();
        let expected = ea.combine(2.0, &eb, -0.5).unwrap();
        for (x, y) in em.values.iter().zip(&expected.values) {
            assert_abs_diff_eq!((x - y).norm(), 0.0, epsilon = 1e-13);
        }
        for i in 0..target.len() {
            let xi = target.node(i);
            if xi[0].abs() <= 0.5 {
                assert_abs_diff_eq!(
                    (ea.values[i] - a.interpolate(&xi).unwrap()).norm(),
                    0.0,
                    epsilon = 1e-15
                );
            }
        }
    }

    #[test]
    fn pieces_partition_the_ring() {
        let known = FrequencyDomain::ball(2, 0.5).unwrap();
        let h = FrequencyDomain::sector_pair(vec![1.0, 0.0], 0.5f64.sqrt(), 0.0, 0.5).unwrap();
        let v = FrequencyDomain::sector_pair(vec![0.0, 1.0], 0.5f64.sqrt(), 0.0, 0.5).unwrap();
        let one = |_: &[f64]| c(1.0);
        let two = |_: &[f64]| c(2.0);
        let low = LowSource::Sampled(GridField::from_fn(GridGeometry::symmetric(2, 11, 0.5).unwrap(), |_| {
            c(1.0)
        }));
        let target = GridGeometry::symmetric(2, 41, 1.0).unwrap();
        let out = extrapolate_field(
            &[Piece::new(&one, &h), Piece::new(&two, &v)],
            &low,
            2.0,
            &known,
            &target,
        )
        .unwrap();
        let at = |p: [f64; 2]| {
            let i = (0..target.len())
                .find(|&i| target.node(i).iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12))
                .unwrap();
            out.values[i].re
        };
        assert_eq!(at([0.0, 0.0]), 1.0);
        assert_eq!(at([0.9, 0.0]), 1.0);
        assert_eq!(at([0.0, -0.9]), 2.0);
        assert_eq!(at([1.0, 1.0]), 0.0);
    }

    #[test]
    fn synthesis_basics() {
        let g = GridGeometry::symmetric(1, 9, 1.0).unwrap();
        let zero = GridField::zeros(g.clone());
        assert_eq!(reconstruct_space(&zero, &[16]).unwrap().sup_norm(), 0.0);
        let mut dc = GridField::zeros(g.clone());
        dc.values[4] = c(3.0);
        let img = reconstruct_space(&dc, &[16]).unwrap();
        for v in &img.values {
            assert_abs_diff_eq!((v - c(3.0 * 0.25)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn synthesis_at_origin_is_the_weighted_sum() {
        let g = GridGeometry::symmetric(2, 7, 1.5).unwrap();
        let f = GridField::from_fn(g.clone(), |xi| Complex64::new(xi[0] + 1.0, xi[1] * xi[0]));
        let img = reconstruct_space(&f, &[4, 4]).unwrap();
        let sum: Complex64 = f.values.iter().sum::<Complex64>() * g.cell_volume();
        assert_abs_diff_eq!((img.values[0] - sum).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn synthesis_matches_direct_sum_in_2d() {
        let g = GridGeometry::new(vec![4, 5], vec![0.5, 0.3], vec![-1.0, -0.6]).unwrap();
        let f = GridField::from_fn(g.clone(), |xi| Complex64::new(xi[0].sin(), xi[1]));
        let img = reconstruct_space_box(&f, &[-1.0, 0.0], &[1.0, 2.0], &[3, 6]).unwrap();
        for j in 0..img.len() {
            let x = img.geometry.node(j);
            let direct: Complex64 = (0..g.len())
                .map(|i| {
                    let xi = g.node(i);
                    f.values[i] * Complex64::from_polar(g.cell_volume(), 2.0 * PI * (xi[0] * x[0] + xi[1] * x[1]))
                })
                .sum();
            assert_abs_diff_eq!((img.values[j] - direct).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn sinc2_synthesizes_to_the_hat() {
        // the truncated tail ∫_{|ξ|>W} sinc² ≈ 1/(π²W) bounds the error at 0
        for (w, tol) in [(4.0, 0.03), (8.0, 0.02)] {
            let g = GridGeometry::symmetric(1, 8193, w).unwrap();
            let f = GridField::from_fn(g, |xi| c(sinc(xi[0]).powi(2)));
            let img = reconstruct_space_box(&f, &[-2.0], &[2.0], &[512]).unwrap();
            let err = (0..img.len())
                .map(|j| {
                    let x = img.geometry.node(j)[0];
                    (img.values[j] - c((1.0 - x.abs()).max(0.0))).norm()
                })
                .fold(0.0, f64::max);
            assert!(err <= tol, "W={w}: {err}");
        }
    }

    #[test]
    fn fft_pair_round_trips_and_matches_direct_sum() {
        let freq = GridGeometry::fft(1, 16, 0.6).unwrap();
        let f = GridField::from_fn(freq.clone(), |xi| Complex64::new(xi[0].cos(), 0.1 * xi[0]));
        let u = fft_synthesis(&f).unwrap();
        for j in 0..u.len() {
            let x = u.geometry.node(j)[0];
            let direct: Complex64 = (0..freq.len())
                .map(|k| f.values[k] * Complex64::from_polar(0.6, 2.0 * PI * freq.node(k)[0] * x))
                .sum();
            assert_abs_diff_eq!((u.values[j] - direct).norm(), 0.0, epsilon = 1e-12);
        }
        let back = fft_analysis(&u, &freq).unwrap();
        for (a, b) in back.values.iter().zip(&f.values) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
        let f2 = GridField::from_fn(GridGeometry::fft(2, 8, 0.5).unwrap(), |xi| {
            Complex64::new(xi[0], xi[1] * xi[1])
        });
        let b2 = fft_analysis(&fft_synthesis(&f2).unwrap(), &f2.geometry).unwrap();
        for (a, b) in b2.values.iter().zip(&f2.values) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-12);
        }
    }

    fn hat_data(n: usize, dxi: f64) -> GridField {
        let freq = GridGeometry::fft(1, n, dxi).unwrap();
        let space = fft_spatial_geometry(&freq).unwrap();
        let u = GridField::from_fn(space, |x| c((1.0 - (2.0 * x[0] - 1.0).abs()).max(0.0)));
        fft_analysis(&u, &freq).unwrap()
    }

    #[test]
    fn gp_zero_steps_is_zero_extension() {
        let data = hat_data(64, 0.6);
        let omega0 = FrequencyDomain::cube(1, 1.0).unwrap();
        let res = gp_iterate(&data, &omega0, &[0.0], &[1.0], 0).unwrap();
        assert!(res.residuals.is_empty());
        assert_eq!(res.field, data.restrict(&omega0).unwrap());
    }

    #[test]
    fn gp_residual_is_monotone() {
        let data = hat_data(512, 0.6);
        let omega0 = FrequencyDomain::cube(1, 1.0).unwrap();
        let res = gp_iterate(&data, &omega0, &[0.0], &[1.0], 100).unwrap();
        assert!(res.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15));
        assert!(res.residuals.last().unwrap() < &(1e-3 * res.residuals[0]));
    }

    #[test]
    fn gp_plateaus_when_support_is_violated() {
        // Ω₀ holds far more samples than functions on the short Q can match,
        // and the target spills outside Q
        let freq = GridGeometry::fft(1, 64, 0.6).unwrap();
        let space = fft_spatial_geometry(&freq).unwrap();
        let u = GridField::from_fn(space, |x| c((1.0 - (2.0 * x[0] - 1.0).abs()).max(0.0)));
        let data = fft_analysis(&u, &freq).unwrap();
        let omega0 = FrequencyDomain::cube(1, 10.0).unwrap();
        let res = gp_iterate(&data, &omega0, &[0.0], &[0.1], 200).unwrap();
        let r = &res.residuals;
        assert!(r.iter().all(|x| x.is_finite()));
        assert!(r.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15));
        assert!(r[199] > 0.1 * r[0]);
        assert!(r[198] - r[199] < 1e-6 * r[0]);
    }

    #[test]
    fn error_metric_examples() {
        let g = GridGeometry::symmetric(1, 11, 1.0).unwrap();
        let region = FrequencyDomain::cube(1, 1.0).unwrap();
        let t = GridField::from_fn(g.clone(), |xi| c(1.0 + xi[0]));
        assert_eq!(extrapolation_error(&t, &t, &region).unwrap(), 0.0);
        assert_abs_diff_eq!(
            extrapolation_error(&GridField::zeros(g.clone()), &t, &region).unwrap(),
            1.0
        );
        let other = GridField::zeros(GridGeometry::symmetric(1, 12, 1.0).unwrap());
        assert!(matches!(
            extrapolation_error(&other, &t, &region),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn optimal_filter_support() {
        let omega0 = FrequencyDomain::cube(1, 0.5).unwrap();
        let g = GridGeometry::symmetric(1, 101, 1.0).unwrap();
        let eta = optimal_filter_hat(&mf, &omega0, 2.0, &g).unwrap();
        for i in 0..g.len() {
            let x = g.node(i)[0].abs();
            if !(0.25 - 1e-9..=0.5 + 1e-9).contains(&x) {
                assert_eq!(eta.values[i], c(0.0));
            } else if x > 0.25 + 1e-9 && x < 0.5 - 1e-9 {
                assert_eq!(eta.values[i], mf(&[g.node(i)[0]]));
            }
        }
    }
}
