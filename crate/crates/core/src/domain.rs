//! Low-frequency sets and their dilations.
//!
//! All shapes are closed and symmetric under `ξ → −ξ`, so membership of a
//! frequency and of its negative always agree.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometric description of a compact frequency set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `{ξ : max_k |ξ_k| ≤ half_width}`
    Cube { half_width: f64 },
    /// `{ξ : |ξ| ≤ radius}`
    Ball { radius: f64 },
    /// `{ξ : r_min ≤ |ξ| ≤ r_max}`
    Annulus { r_min: f64, r_max: f64 },
    /// Two opposite cones around `±axis`, cut to `r_min ≤ |ξ| ≤ r_max`.
    SectorPair {
        axis: Vec<f64>,
        cos_half_angle: f64,
        r_min: f64,
        r_max: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyDomain {
    dim: usize,
    #[serde(flatten)]
    shape: Shape,
}

// Relative slack on boundary tests so that scaled points land inside
// scaled sets despite rounding.
const BOUNDARY_SLACK: f64 = 1e-12;

impl FrequencyDomain {
    pub fn new(dim: usize, shape: Shape) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDomain("dimension must be positive".into()));
        }
        let positive = |v: f64, what: &str| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidDomain(format!("{what} must be positive, got {v}")))
            }
        };
        let shape = match shape {
            Shape::Cube { half_width } => {
                positive(half_width, "half_width")?;
                Shape::Cube { half_width }
            }
            Shape::Ball { radius } => {
                positive(radius, "radius")?;
                Shape::Ball { radius }
            }
            Shape::Annulus { r_min, r_max } => {
                check_radii(r_min, r_max)?;
                Shape::Annulus { r_min, r_max }
            }
            Shape::SectorPair {
                axis,
                cos_half_angle,
                r_min,
                r_max,
            } => {
                check_radii(r_min, r_max)?;
                if axis.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: axis.len(),
                    });
                }
                let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt();
                if !(norm.is_finite() && norm > 0.0) {
                    return Err(Error::InvalidDomain("sector axis must be nonzero".into()));
                }
                if !(cos_half_angle > 0.0 && cos_half_angle < 1.0) {
                    return Err(Error::InvalidDomain(format!(
                        "cos_half_angle must lie in (0, 1), got {cos_half_angle}"
                    )));
                }
                Shape::SectorPair {
                    axis: axis.iter().map(|a| a / norm).collect(),
                    cos_half_angle,
                    r_min,
                    r_max,
                }
            }
        };
        Ok(Self { dim, shape })
    }

    pub fn cube(dim: usize, half_width: f64) -> Result<Self> {
        Self::new(dim, Shape::Cube { half_width })
    }

    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Self::new(dim, Shape::Ball { radius })
    }

    pub fn annulus(dim: usize, r_min: f64, r_max: f64) -> Result<Self> {
        Self::new(dim, Shape::Annulus { r_min, r_max })
    }

    pub fn sector_pair(axis: Vec<f64>, cos_half_angle: f64, r_min: f64, r_max: f64) -> Result<Self> {
        Self::new(
            axis.len(),
            Shape::SectorPair {
                axis,
                cos_half_angle,
                r_min,
                r_max,
            },
        )
    }

    /// Re-runs constructor validation; used after deserialization.
    pub fn validated(self) -> Result<Self> {
        Self::new(self.dim, self.shape)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn contains(&self, xi: &[f64]) -> Result<bool> {
        if xi.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: xi.len(),
            });
        }
        Ok(self.contains_unchecked(xi))
    }

    /// Membership without the dimension check; callers guarantee `xi.len() == dim`.
    pub(crate) fn contains_unchecked(&self, xi: &[f64]) -> bool {
        match &self.shape {
            Shape::Cube { half_width } => {
                let lim = half_width * (1.0 + BOUNDARY_SLACK);
                xi.iter().all(|x| x.abs() <= lim)
            }
            Shape::Ball { radius } => norm(xi) <= radius * (1.0 + BOUNDARY_SLACK),
            Shape::Annulus { r_min, r_max } => in_radii(norm(xi), *r_min, *r_max),
            Shape::SectorPair {
                axis,
                cos_half_angle,
                r_min,
                r_max,
            } => {
                let r = norm(xi);
                if !in_radii(r, *r_min, *r_max) {
                    return false;
                }
                if r == 0.0 {
                    // only reachable with r_min == 0; the apex belongs to both cones
                    return true;
                }
                let cos = xi.iter().zip(axis).map(|(x, a)| x * a).sum::<f64>() / r;
                cos.abs() >= cos_half_angle * (1.0 - BOUNDARY_SLACK)
            }
        }
    }

    /// The set `αΩ₀`.
    pub fn dilate(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.0) {
            return Err(Error::param("alpha", format!("must exceed 1, got {alpha}")));
        }
        Ok(self.scaled(alpha))
    }

    /// Scaling by any positive factor; `dilate` restricts to factors above one.
    pub(crate) fn scaled(&self, s: f64) -> Self {
        let shape = match &self.shape {
            Shape::Cube { half_width } => Shape::Cube {
                half_width: half_width * s,
            },
            Shape::Ball { radius } => Shape::Ball { radius: radius * s },
            Shape::Annulus { r_min, r_max } => Shape::Annulus {
                r_min: r_min * s,
                r_max: r_max * s,
            },
            Shape::SectorPair {
                axis,
                cos_half_angle,
                r_min,
                r_max,
            } => Shape::SectorPair {
                axis: axis.clone(),
                cos_half_angle: *cos_half_angle,
                r_min: r_min * s,
                r_max: r_max * s,
            },
        };
        Self { dim: self.dim, shape }
    }

    /// Axis-aligned box containing the domain.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let half = match &self.shape {
            Shape::Cube { half_width } => *half_width,
            Shape::Ball { radius } => *radius,
            Shape::Annulus { r_max, .. } | Shape::SectorPair { r_max, .. } => *r_max,
        };
        (vec![-half; self.dim], vec![half; self.dim])
    }

    /// Exact Lebesgue measure where a closed form exists (all shapes in d ≤ 2,
    /// cubes and balls in any dimension).
    pub fn measure(&self) -> Option<f64> {
        let d = self.dim as i32;
        let ball = |r: f64| unit_ball_volume(self.dim) * r.powi(d);
        match &self.shape {
            Shape::Cube { half_width } => Some((2.0 * half_width).powi(d)),
            Shape::Ball { radius } => Some(ball(*radius)),
            Shape::Annulus { r_min, r_max } => Some(ball(*r_max) - ball(*r_min)),
            Shape::SectorPair {
                cos_half_angle,
                r_min,
                r_max,
                ..
            } => match self.dim {
                1 => Some(2.0 * (r_max - r_min)),
                2 => {
                    let half_angle = cos_half_angle.acos();
                    Some(2.0 * half_angle * (r_max * r_max - r_min * r_min))
                }
                _ => None,
            },
        }
    }
}

fn check_radii(r_min: f64, r_max: f64) -> Result<()> {
    if !(r_min.is_finite() && r_max.is_finite() && r_min >= 0.0 && r_min < r_max) {
        return Err(Error::InvalidDomain(format!(
            "radii must satisfy 0 <= r_min < r_max, got ({r_min}, {r_max})"
        )));
    }
    Ok(())
}

fn in_radii(r: f64, r_min: f64, r_max: f64) -> bool {
    r >= r_min * (1.0 - BOUNDARY_SLACK) && r <= r_max * (1.0 + BOUNDARY_SLACK)
}

pub(crate) fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}
