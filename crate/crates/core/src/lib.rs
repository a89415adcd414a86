//! Worst-case optimal Fourier multipliers for extrapolation in frequency.
//!
//! Given a finite family `f_1, …, f_n` of Fourier transforms, a low-frequency
//! set `Ω₀` and a dilation `α > 1`, a Σ-multiplier
//!
//! ```text
//! m_Σ(ξ) = ⟨f(ξ), (δI + Σ) f(αξ)⟩ / ⟨f(ξ), (δI + Σ) f(ξ)⟩
//! ```
//!
//! maps `f|_{Ω₀}` to an estimate of `f(α·)|_{Ω₀}`. The crate finds the
//! optimal `Σ` with a projected fixed-point iteration ([`solver::solve`]),
//! uses the multiplier to extrapolate sampled spectra
//! ([`extrapolation::extrapolate_field`]), and builds refinable functions and
//! wavelets from it ([`multiresolution::cascade`]).
//!
//! ```
//! use freqext::{FrequencyDomain, FunctionFamily, MemberSpec, SigmaMultiplier};
//!
//! let family = FunctionFamily::new(vec![MemberSpec::sinc_power(2, 1)]).unwrap();
//! let m = SigmaMultiplier::trace(family, 2.0).unwrap();
//! // for a single function the multiplier is f(2ξ)/f(ξ) = cos²(πξ)
//! let expected = (std::f64::consts::PI * 0.2).cos().powi(2);
//! assert!((m.eval(&[0.2]).re - expected).abs() < 1e-12);
//! # let _ = FrequencyDomain::cube(1, 0.5).unwrap();
//! ```

pub mod config;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod export;
pub mod extrapolation;
pub mod family;
pub mod gram;
pub mod hermitian;
pub mod idx;
pub mod multiplier;
pub mod multiresolution;
pub mod quadrature;
pub mod solver;
pub mod spectral;

pub use config::{ExperimentConfig, Stage};
pub use domain::{FrequencyDomain, Shape};
pub use error::{Error, Result};
pub use experiment::{run_experiment, run_stages, ExperimentReport};
pub use extrapolation::{GridField, GridGeometry, LowSource};
pub use family::{make_scalings, make_translates, FunctionFamily, MemberSpec, Profile};
pub use gram::gram_matrix;
pub use hermitian::HermitianMatrix;
pub use multiplier::{trace_multiplier, FrequencyMap, SigmaMultiplier};
pub use multiresolution::{cascade, CascadeResult, PeriodicMask};
pub use quadrature::{monte_carlo_rule, tensor_rule, NodeSchedule, QuadratureRule};
pub use solver::{solve, validate_params, SolverConfig};
pub use spectral::{project_spectral, SpectralSet};
