use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use freqext::experiment::{run_export_filter, run_validate_params};
use freqext::{run_experiment, run_stages, ExperimentConfig, ExperimentReport, Stage};

#[derive(Parser)]
#[command(
    name = "freqext",
    version,
    about = "Optimal Fourier multipliers for extrapolation in frequency"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory in the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the fixed-point solver and export Σ, the multiplier and the trace.
    Solve(Common),
    /// Solve, then extrapolate one family member to the dilated domain.
    Extrapolate(Common),
    /// Solve, then build φ̂, φ, Φ, g, ψ̂ and ψ with the cascade algorithm.
    Cascade(Common),
    /// Gerchberg–Papoulis baseline.
    GpBaseline(Common),
    /// Report the contraction constants for the configured parameters.
    ValidateParams(Common),
    /// Solve, then export the optimal detail filter.
    ExportFilter(Common),
    /// Run the pipeline listed in the config.
    Run(Common),
}

fn load(c: &Common) -> freqext::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &c.out {
        // relative to the working directory, not the config file
        cfg.output.dir = std::env::current_dir()
            .map(|d| d.join(out))
            .unwrap_or_else(|_| out.clone());
    }
    Ok(cfg)
}

fn print_report(r: &ExperimentReport) {
    for (name, value) in &r.metrics {
        println!("{name} = {value}");
    }
    println!("{} artifacts in {}", r.entries.len(), r.out_dir.display());
}

fn run(cli: Cli) -> freqext::Result<()> {
    let report = match &cli.command {
        Command::Solve(c) => run_stages(&load(c)?, &[Stage::Solve])?,
        Command::Extrapolate(c) => run_stages(&load(c)?, &[Stage::Solve, Stage::Extrapolate])?,
        Command::Cascade(c) => run_stages(&load(c)?, &[Stage::Solve, Stage::Cascade])?,
        Command::GpBaseline(c) => run_stages(&load(c)?, &[Stage::BaselineGp])?,
        Command::ValidateParams(c) => {
            let (diag, report) = run_validate_params(&load(c)?)?;
            if !diag.satisfied {
                eprintln!("warning: contraction bound {:.4} is not below 1", diag.bound);
            }
            report
        }
        Command::ExportFilter(c) => run_export_filter(&load(c)?)?,
        Command::Run(c) => run_experiment(&load(c)?)?,
    };
    print_report(&report);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
