//! Every example in `examples/` runs and reports what it claims.

#[path = "../examples/bspline_cascade.rs"]
mod bspline_cascade;
#[path = "../examples/gp_baseline.rs"]
mod gp_baseline;
#[path = "../examples/mask_recovery.rs"]
mod mask_recovery;
#[path = "../examples/quadrature_rules.rs"]
mod quadrature_rules;
#[path = "../examples/single_function.rs"]
mod single_function;
#[path = "../examples/solve_translates.rs"]
mod solve_translates;
#[path = "../examples/spectral_projection.rs"]
mod spectral_projection;
#[path = "../examples/synthetic_mnist.rs"]
mod synthetic_mnist;
#[path = "../examples/trace_multiplier.rs"]
mod trace_multiplier;
#[path = "../examples/windowed_decay.rs"]
mod windowed_decay;

use freqext::ExperimentConfig;
use std::path::Path;

#[test]
fn single_function() {
    assert!(single_function::run_example().unwrap() < 1e-12);
}

#[test]
fn solve_translates() {
    assert!(solve_translates::run_example().unwrap() < 1e-8);
}

#[test]
fn mask_recovery() {
    assert!(mask_recovery::run_example().unwrap() < 1e-10);
}

#[test]
fn spectral_projection() {
    spectral_projection::run_example().unwrap();
}

#[test]
fn bspline_cascade() {
    let out = bspline_cascade::run_example().unwrap();
    assert!(out.phi_hat_error < 1e-3 && out.phi_error < 0.02);
}

#[test]
fn gp_baseline() {
    let res = gp_baseline::run_example().unwrap();
    assert!(*res.residuals.last().unwrap() < 1e-6);
}

#[test]
fn trace_multiplier() {
    assert!(trace_multiplier::run_example().unwrap() < 1e-10);
}

#[test]
fn windowed_decay() {
    assert!(windowed_decay::run_example().unwrap() < -3.5);
}

#[test]
fn quadrature_rules() {
    quadrature_rules::run_example().unwrap();
}

#[test]
fn synthetic_mnist_small() {
    let dir = tempfile::tempdir().unwrap();
    let (report, filter) = synthetic_mnist::run_in(dir.path(), 4, 5).unwrap();
    assert_eq!(report.metric("members"), Some(4.0));
    assert!(report.metric("extrapolation_error").unwrap().is_finite());
    assert!(filter.metric("filter_sup").unwrap().is_finite());
}

#[test]
fn shipped_configs_parse_and_validate() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let loaded = ExperimentConfig::load(&path);
            // IDX configs point at user-supplied files
            if path
                .file_stem()
                .is_some_and(|s| s.to_string_lossy().starts_with("mnist"))
            {
                let err = loaded.unwrap_err().to_string();
                assert!(err.contains("does not exist"), "{err}");
            } else {
                loaded.unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            }
            seen += 1;
        }
    }
    assert!(seen >= 4);
}
