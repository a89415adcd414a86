//! Unitarily invariant matrix sets `W = {U diag(d) U* : d ∈ D_W}` and
//! Euclidean projection onto them.
//!
//! Projecting a Hermitian matrix reduces to projecting its eigenvalue vector
//! onto `D_W` and reassembling with the same eigenvectors. For orthosymmetric
//! `D_W` this keeps positive semidefinite inputs positive semidefinite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::HermitianMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpectralSet {
    /// `{X : Σ|λ_i| ≤ radius}`
    NuclearBall { radius: f64 },
    /// `{X : max|λ_i| ≤ radius}`
    OperatorBall { radius: f64 },
    /// `{X ⪰ 0 : trace X ≤ cap}`
    TraceCap { cap: f64 },
}

impl SpectralSet {
    pub fn validate(&self) -> Result<()> {
        let (name, v) = match *self {
            SpectralSet::NuclearBall { radius } | SpectralSet::OperatorBall { radius } => ("radius", radius),
            SpectralSet::TraceCap { cap } => ("cap", cap),
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::param(name, format!("must be positive, got {v}")));
        }
        Ok(())
    }

    /// Euclidean projection of an eigenvalue vector onto `D_W`.
    pub fn project_vector(&self, v: &[f64]) -> Vec<f64> {
        match *self {
            SpectralSet::NuclearBall { radius } => project_l1_ball(v, radius),
            SpectralSet::OperatorBall { radius } => project_box(v, radius),
            SpectralSet::TraceCap { cap } => project_capped_cone(v, cap),
        }
    }

    pub fn project(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        let eig = x.eigendecompose()?;
        Ok(eig.reassemble(&self.project_vector(&eig.values)))
    }

    /// Support function `σ_W(G) = sup_{X∈W} ⟨X, G⟩_F`, from the spectrum of `G`.
    pub fn support(&self, g: &HermitianMatrix) -> Result<f64> {
        let lam = g.eigenvalues()?;
        Ok(self.support_of_spectrum(&lam))
    }

    pub fn support_of_spectrum(&self, lam: &[f64]) -> f64 {
        match *self {
            SpectralSet::NuclearBall { radius } => radius * lam.iter().fold(0.0, |m, l| f64::max(m, l.abs())),
            SpectralSet::OperatorBall { radius } => radius * lam.iter().map(|l| l.abs()).sum::<f64>(),
            SpectralSet::TraceCap { cap } => cap * lam.iter().fold(0.0, |m, &l| f64::max(m, l)),
        }
    }

    /// `sup {trace X : X ∈ W}`
    pub fn max_trace(&self, n: usize) -> f64 {
        match *self {
            SpectralSet::NuclearBall { radius } => radius,
            SpectralSet::OperatorBall { radius } => radius * n as f64,
            SpectralSet::TraceCap { cap } => cap,
        }
    }

    /// Membership with relative tolerance `tol`.
    pub fn contains(&self, x: &HermitianMatrix, tol: f64) -> Result<bool> {
        let lam = x.eigenvalues()?;
        Ok(match *self {
            SpectralSet::NuclearBall { radius } => lam.iter().map(|l| l.abs()).sum::<f64>() <= radius * (1.0 + tol),
            SpectralSet::OperatorBall { radius } => lam.iter().all(|l| l.abs() <= radius * (1.0 + tol)),
            SpectralSet::TraceCap { cap } => {
                lam.iter().all(|&l| l >= -tol * cap) && lam.iter().sum::<f64>() <= cap * (1.0 + tol)
            }
        })
    }
}

/// Projection onto `{d : Σ|d_i| ≤ r}` by soft thresholding with the exact
/// threshold found from the sorted magnitudes.
pub fn project_l1_ball(v: &[f64], r: f64) -> Vec<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= r {
        return v.to_vec();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - r) / (k + 1) as f64;
        if u > t {
            theta = t;
        } else {
            break;
        }
    }
    v.iter().map(|&x| x.signum() * (x.abs() - theta).max(0.0)).collect()
}

/// Coordinate clipping onto `[−r, r]^n`.
pub fn project_box(v: &[f64], r: f64) -> Vec<f64> {
    v.iter().map(|x| x.clamp(-r, r)).collect()
}

/// Projection onto `{d ≥ 0 : Σ d_i ≤ cap}`.
pub fn project_capped_cone(v: &[f64], cap: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= cap {
        return clipped;
    }
    // onto the face Σ d = cap: the l1 projection of the nonnegative part
    project_l1_ball(&clipped, cap)
}

/// Projection of a Hermitian matrix onto `W`.
pub fn project_spectral(w: &SpectralSet, x: &HermitianMatrix) -> Result<HermitianMatrix> {
    w.project(x)
}
