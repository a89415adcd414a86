//! Node/weight rules for `∫_{Ω₀} g dξ` with Lebesgue measure.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::FrequencyDomain;
use crate::error::{Error, Result};

/// Points in `R^d`, stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeSet {
    dim: usize,
    coords: Vec<f64>,
}

impl NodeSet {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            coords: Vec::new(),
        }
    }

    pub fn from_points(dim: usize, points: &[Vec<f64>]) -> Result<Self> {
        let mut set = Self::new(dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            set.coords.extend_from_slice(p);
        }
        Ok(set)
    }

    /// Cartesian product of per-axis coordinates, last axis fastest.
    pub fn tensor(axes: &[Vec<f64>]) -> Self {
        let dim = axes.len();
        let total: usize = axes.iter().map(Vec::len).product();
        let mut coords = Vec::with_capacity(total * dim);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            coords.extend(idx.iter().zip(axes).map(|(&i, a)| a[i]));
            for k in (0..dim).rev() {
                idx[k] += 1;
                if idx[k] < axes[k].len() {
                    break;
                }
                idx[k] = 0;
            }
        }
        Self { dim, coords }
    }

    pub fn push(&mut self, p: &[f64]) {
        debug_assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim.max(1))
    }

    pub(crate) fn permuted(&self, order: &[usize]) -> Self {
        let mut out = Self::new(self.dim);
        for &i in order {
            out.push(self.get(i));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    Tensor,
    MonteCarlo,
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: NodeSet,
    weights: Vec<f64>,
    seed: Option<u64>,
    kind: RuleKind,
}

impl QuadratureRule {
    pub fn new(nodes: NodeSet, weights: Vec<f64>, kind: RuleKind, seed: Option<u64>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::EmptyDomain);
        }
        if nodes.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                got: weights.len(),
            });
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::param("weights", format!("must be positive, found {w}")));
        }
        Ok(Self {
            nodes,
            weights,
            seed,
            kind,
        })
    }

    pub fn nodes(&self) -> &NodeSet {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.nodes.dim()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Short identifier used in reports, e.g. `tensor:1024` or `mc:5000@42`.
    pub fn id(&self) -> String {
        match (self.kind, self.seed) {
            (RuleKind::Tensor, _) => format!("tensor:{}", self.len()),
            (RuleKind::MonteCarlo, Some(s)) => format!("mc:{}@{}", self.len(), s),
            (RuleKind::MonteCarlo, None) => format!("mc:{}", self.len()),
        }
    }

    /// Same nodes and weights in a different order.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self {
            nodes: self.nodes.permuted(order),
            weights: order.iter().map(|&i| self.weights[i]).collect(),
            seed: self.seed,
            kind: self.kind,
        }
    }

    /// `Σ_i w_i g(ξ_i)`, summed in node order.
    pub fn integrate<G>(&self, g: G) -> Result<Complex64>
    where
        G: Fn(&[f64]) -> Complex64,
    {
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, &w) in self.nodes.iter().zip(&self.weights) {
            let v = g(xi);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite {
                    node: xi.to_vec(),
                    value: v.to_string(),
                });
            }
            acc += v * w;
        }
        Ok(acc)
    }
}

/// Midpoint rule on the bounding box with `resolution` cells per axis;
/// cells whose midpoint leaves the domain are dropped.
pub fn tensor_rule(domain: &FrequencyDomain, resolution: usize) -> Result<QuadratureRule> {
    if resolution < 2 {
        return Err(Error::param("resolution", "must be at least 2"));
    }
    let (lo, hi) = domain.bounding_box();
    let widths: Vec<f64> = lo.iter().zip(&hi).map(|(a, b)| (b - a) / resolution as f64).collect();
    let axes: Vec<Vec<f64>> = lo
        .iter()
        .zip(&widths)
        .map(|(&a, &h)| (0..resolution).map(|i| a + (i as f64 + 0.5) * h).collect())
        .collect();
    let cell: f64 = widths.iter().product();
    let grid = NodeSet::tensor(&axes);
    let mut nodes = NodeSet::new(domain.dim());
    for xi in grid.iter().filter(|xi| domain.contains_unchecked(xi)) {
        nodes.push(xi);
    }
    if nodes.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let weights = vec![cell; nodes.len()];
    QuadratureRule::new(nodes, weights, RuleKind::Tensor, None)
}

/// Uniform rejection sampling from the bounding box. Each weight is
/// `box_volume · acceptance_rate / count`.
pub fn monte_carlo_rule(domain: &FrequencyDomain, count: usize, seed: u64) -> Result<QuadratureRule> {
    if count == 0 {
        return Err(Error::param("count", "must be at least 1"));
    }
    let (lo, hi) = domain.bounding_box();
    let box_volume: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_attempts = 10_000usize.max(count.saturating_mul(1_000));
    let mut nodes = NodeSet::new(domain.dim());
    let mut point = vec![0.0; domain.dim()];
    let mut attempts = 0usize;
    while nodes.len() < count {
        if attempts >= max_attempts {
            return Err(Error::RejectionExhausted { attempts });
        }
        attempts += 1;
        for (p, (a, b)) in point.iter_mut().zip(lo.iter().zip(&hi)) {
            *p = rng.gen_range(*a..*b);
        }
        if domain.contains_unchecked(&point) {
            nodes.push(&point);
        }
    }
    let acceptance = count as f64 / attempts as f64;
    let w = box_volume * acceptance / count as f64;
    QuadratureRule::new(nodes, vec![w; count], RuleKind::MonteCarlo, Some(seed))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Growth {
    Linear,
    #[default]
    Geometric,
}

/// Node counts per iteration, growing from `min_nodes` to `max_nodes`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSchedule {
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub growth: Growth,
}

impl NodeSchedule {
    pub fn new(min_nodes: usize, max_nodes: usize, growth: Growth) -> Result<Self> {
        if min_nodes == 0 || min_nodes > max_nodes {
            return Err(Error::param(
                "schedule",
                format!("need 1 <= min_nodes <= max_nodes, got {min_nodes}..{max_nodes}"),
            ));
        }
        Ok(Self {
            min_nodes,
            max_nodes,
            growth,
        })
    }

    /// Node count for iteration `k` of `iterations`; nondecreasing in `k`,
    /// `min_nodes` at the first iteration and `max_nodes` at the last.
    pub fn count(&self, k: usize, iterations: usize) -> usize {
        if iterations <= 1 {
            return self.max_nodes;
        }
        let t = k.min(iterations - 1) as f64 / (iterations - 1) as f64;
        let (lo, hi) = (self.min_nodes as f64, self.max_nodes as f64);
        let n = match self.growth {
            Growth::Linear => lo + t * (hi - lo),
            Growth::Geometric => lo * (hi / lo).powf(t),
        };
        (n.round() as usize).clamp(self.min_nodes, self.max_nodes)
    }
}

/// Seed for iteration `k`: one splitmix64 step applied to
/// `seed + (k + 1)·0x9E3779B97F4A7C15`.
pub fn derive_seed(seed: u64, k: usize) -> u64 {
    let mut z = seed.wrapping_add((k as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
