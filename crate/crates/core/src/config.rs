//! Experiment configuration, read from TOML.
//!
//! ```toml
//! alpha = 2.0
//! seed = 7
//! pipeline = ["solve", "cascade"]
//!
//! [domain]
//! dim = 1
//! shape = "cube"
//! half_width = 0.5
//!
//! [family]
//! source = "closed_form"
//! members = [{ kind = "sinc_power", power = 2 }]
//!
//! [solver]
//! delta = 1e-6
//! tau_g = 0.25
//! tau_sigma = 0.5
//! iterations = 50
//! w = { kind = "nuclear_ball", radius = 1.0 }
//! rule = { kind = "tensor", resolution = 1024 }
//! ```
//!
//! Relative paths resolve against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::FrequencyDomain;
use crate::error::{Error, Result};
use crate::family::{make_translates, DiscreteData, FunctionFamily, MemberSpec};
use crate::idx::load_idx_images;
use crate::quadrature::{tensor_rule, NodeSchedule};
use crate::solver::{RuleSource, SolverConfig};
use crate::spectral::SpectralSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Solve,
    Extrapolate,
    Cascade,
    BaselineGp,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Solve => "solve",
            Stage::Extrapolate => "extrapolate",
            Stage::Cascade => "cascade",
            Stage::BaselineGp => "baseline_gp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    /// Explicit members. With `translates`, `members` must hold exactly one
    /// base function and the family is the base plus its translates.
    ClosedForm {
        members: Vec<MemberSpec>,
        #[serde(default)]
        translates: Vec<Vec<f64>>,
    },
    /// The first `count` images of `digit` from an IDX image/label pair,
    /// interpolated with box kernels on the unit square.
    Idx {
        images: PathBuf,
        labels: PathBuf,
        digit: u8,
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuleSpec {
    Tensor {
        resolution: usize,
    },
    MonteCarlo {
        min_nodes: usize,
        max_nodes: usize,
        #[serde(default)]
        growth: crate::quadrature::Growth,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub delta: f64,
    pub tau_g: f64,
    pub tau_sigma: f64,
    pub iterations: usize,
    pub w: SpectralSet,
    pub rule: RuleSpec,
    #[serde(default)]
    pub trace_bound: Option<f64>,
    /// Tensor resolution of the probe rule used by `validate-params`.
    #[serde(default = "default_probe")]
    pub probe_resolution: usize,
}

fn default_probe() -> usize {
    256
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtrapolateSection {
    /// Points per axis of the target grid.
    pub points: usize,
    /// Region whose data is kept as is; `Ω₀` when absent.
    pub known: Option<FrequencyDomain>,
    /// Family member to extrapolate.
    pub member: usize,
    /// Points per axis of the spatial reconstructions on `[0, 1]^d`.
    pub spatial_points: usize,
}

impl Default for ExtrapolateSection {
    fn default() -> Self {
        Self {
            points: 257,
            known: None,
            member: 0,
            spatial_points: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CascadeSection {
    pub products: usize,
    /// Periodization terms, odd.
    pub terms: usize,
    /// Boundary window order `N`.
    pub window_order: u32,
    /// Exponent `p` of the `2^p` mask normalization.
    pub rescale: i32,
    /// Samples of the periodized mask on `[−1/2, 1/2)`.
    pub mask_resolution: usize,
    pub grid_points: usize,
    pub half_width: f64,
    /// Samples of `Φ` on `[−1/2, 1/2)`.
    pub phi_resolution: usize,
    /// Spatial samples of `φ` and `ψ` on `[−spatial_half_width, spatial_half_width)`.
    pub spatial_points: usize,
    pub spatial_half_width: f64,
}

impl Default for CascadeSection {
    fn default() -> Self {
        Self {
            products: 128,
            terms: 257,
            window_order: 0,
            rescale: 0,
            mask_resolution: 8192,
            grid_points: 8192,
            half_width: 8.0,
            phi_resolution: 1024,
            spatial_points: 512,
            spatial_half_width: 2.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GpTarget {
    /// `u(x) = max(0, 1 − |2x − 1|)`, sampled on the spatial grid.
    Hat,
    /// A family member, evaluated exactly in frequency.
    Member { index: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpSection {
    /// FFT grid size per axis, even.
    pub points: usize,
    /// Frequency spacing.
    pub spacing: f64,
    pub steps: usize,
    pub q_lo: f64,
    pub q_hi: f64,
    /// Data region; `Ω₀` when absent.
    pub omega0: Option<FrequencyDomain>,
    pub target: GpTarget,
}

impl Default for GpSection {
    fn default() -> Self {
        Self {
            points: 4096,
            spacing: 0.6,
            steps: 200,
            q_lo: 0.0,
            q_hi: 1.0,
            omega0: None,
            target: GpTarget::Hat,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub pgm: bool,
    /// 8 or 16.
    pub bit_depth: u8,
    /// Points per axis for multiplier and filter panels.
    pub panel_points: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            pgm: true,
            bit_depth: 8,
            panel_points: 257,
        }
    }
}

fn default_pipeline() -> Vec<Stage> {
    vec![Stage::Solve]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub alpha: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_pipeline")]
    pub pipeline: Vec<Stage>,
    pub domain: FrequencyDomain,
    pub family: FamilyConfig,
    pub solver: SolverSection,
    #[serde(default)]
    pub extrapolate: ExtrapolateSection,
    #[serde(default)]
    pub cascade: CascadeSection,
    #[serde(default)]
    pub gp: GpSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base_dir = base_dir.into();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml_str(&text, base)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn base_dir(&self) -> &Path {
        &self.base_dir
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }

    pub fn validate(&mut self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::Config(format!("alpha must exceed 1, got {}", self.alpha)));
        }
        self.domain = self.domain.clone().validated()?;
        let d = self.domain.dim();
        for extra in [&mut self.extrapolate.known, &mut self.gp.omega0].into_iter().flatten() {
            *extra = extra.clone().validated()?;
            if extra.dim() != d {
                return Err(Error::Config(format!(
                    "auxiliary domain has dimension {}, expected {d}",
                    extra.dim()
                )));
            }
        }
        match &self.family {
            FamilyConfig::ClosedForm { members, translates } => {
                if members.is_empty() {
                    return Err(Error::Config("family needs at least one member".into()));
                }
                if !translates.is_empty() && members.len() != 1 {
                    return Err(Error::Config("translates need exactly one base member".into()));
                }
            }
            FamilyConfig::Idx {
                images,
                labels,
                digit,
                count,
            } => {
                if *count == 0 {
                    return Err(Error::Config("family count must be at least 1".into()));
                }
                if *digit > 9 {
                    return Err(Error::Config(format!("digit must be in 0..=9, got {digit}")));
                }
                if d != 2 {
                    return Err(Error::Config("IDX families live in two dimensions".into()));
                }
                for p in [images, labels] {
                    let full = self.resolve(p);
                    if !full.exists() {
                        return Err(Error::Config(format!("{} does not exist", full.display())));
                    }
                }
            }
        }
        if self.cascade.terms.is_multiple_of(2) {
            return Err(Error::Config("cascade.terms must be odd".into()));
        }
        if !matches!(self.output.bit_depth, 8 | 16) {
            return Err(Error::Config(format!(
                "bit_depth must be 8 or 16, got {}",
                self.output.bit_depth
            )));
        }
        self.solver_config()?.validate()
    }

    /// Builds the family; modulations left empty default to the origin.
    pub fn family(&self) -> Result<FunctionFamily> {
        let d = self.domain.dim();
        let fill = |m: &MemberSpec| {
            let mut m = m.clone();
            if m.modulation.is_empty() {
                m.modulation = vec![0.0; d];
            }
            m
        };
        let family = match &self.family {
            FamilyConfig::ClosedForm { members, translates } if !translates.is_empty() => {
                make_translates(fill(&members[0]), translates)?
            }
            FamilyConfig::ClosedForm { members, .. } => FunctionFamily::new(members.iter().map(fill).collect())?,
            FamilyConfig::Idx {
                images,
                labels,
                digit,
                count,
            } => {
                let imgs = load_idx_images(&self.resolve(images), &self.resolve(labels), *digit, *count)?;
                let members = imgs
                    .iter()
                    .map(|im| DiscreteData::from_image(im.side, &im.pixels).map(MemberSpec::discrete))
                    .collect::<Result<Vec<_>>>()?;
                FunctionFamily::new(members)?
            }
        };
        if family.dim() != d {
            return Err(Error::Config(format!(
                "family has dimension {}, domain has {d}",
                family.dim()
            )));
        }
        Ok(family)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        let rules = match s.rule {
            RuleSpec::Tensor { resolution } => RuleSource::Fixed(tensor_rule(&self.domain, resolution)?),
            RuleSpec::MonteCarlo {
                min_nodes,
                max_nodes,
                growth,
            } => RuleSource::MonteCarlo(NodeSchedule::new(min_nodes, max_nodes, growth)?),
        };
        let mut cfg = SolverConfig::new(s.delta, s.tau_g, s.tau_sigma, s.iterations, s.w, rules).with_seed(self.seed);
        cfg.trace_bound = s.trace_bound;
        Ok(cfg)
    }

    /// Coefficients selecting one family member.
    pub fn member_coeffs(&self, n: usize, index: usize) -> Result<Vec<Complex64>> {
        if index >= n {
            return Err(Error::Config(format!("member {index} out of range for {n} members")));
        }
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[index] = Complex64::new(1.0, 0.0);
        Ok(c)
    }
}
