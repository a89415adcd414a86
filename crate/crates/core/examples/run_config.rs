//! Runs an experiment file, as the `freqext run` subcommand does.
//!
//! ```bash
//! cargo run --release --example run_config -- crates/core/examples/configs/bspline_1d.toml
//! ```

use std::path::PathBuf;

use freqext::{run_experiment, ExperimentConfig};

pub fn run_example() -> freqext::Result<()> {
    let path = std::env::args_os()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/contraction_1d.toml"));
    let mut config = ExperimentConfig::load(&path)?;
    config.output.dir = std::env::temp_dir().join("freqext_run_config");
    let report = run_experiment(&config)?;
    for (name, value) in &report.metrics {
        println!("{name:>24} = {value}");
    }
    for (file, hash) in &report.entries {
        println!("{hash}  {file}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example()
}
