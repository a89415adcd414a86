//! The two-dimensional pipeline on MNIST-format files. Real MNIST files are
//! user supplied; this example writes a small synthetic set of 28×28
//! digit-like images in IDX format and runs solve, extrapolate and the
//! detail filter export on it.
//!
//! ```bash
//! cargo run --release --example synthetic_mnist
//! ```

use std::path::Path;

use freqext::experiment::run_export_filter;
use freqext::idx::encode_idx;
use freqext::{run_experiment, ExperimentConfig, ExperimentReport};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SIDE: usize = 28;

fn ring(img: &mut [f64], cy: f64, cx: f64, r: f64, width: f64) {
    for y in 0..SIDE {
        for x in 0..SIDE {
            let d = ((y as f64 + 0.5 - cy).hypot(x as f64 + 0.5 - cx) - r).abs();
            let v = (1.0 - d / width).clamp(0.0, 1.0);
            img[y * SIDE + x] = img[y * SIDE + x].max(v);
        }
    }
}

fn bar(img: &mut [f64], cx: f64, top: f64, bottom: f64, width: f64) {
    for y in 0..SIDE {
        let yy = y as f64 + 0.5;
        if yy < top || yy > bottom {
            continue;
        }
        for x in 0..SIDE {
            let v = (1.0 - (x as f64 + 0.5 - cx).abs() / width).clamp(0.0, 1.0);
            img[y * SIDE + x] = img[y * SIDE + x].max(v);
        }
    }
}

/// Eights (two stacked rings), zeros (one ring) and ones (a bar), with
/// random jitter; labels cycle 8, 0, 8, 1.
pub fn synthetic_digits(count: usize, seed: u64) -> (Vec<Vec<u8>>, Vec<u8>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    for i in 0..count {
        let label = [8u8, 0, 8, 1][i % 4];
        let mut img = vec![0.0; SIDE * SIDE];
        let cx = 14.0 + rng.gen_range(-1.5..1.5);
        let w = rng.gen_range(1.4..2.2);
        match label {
            8 => {
                ring(&mut img, 9.0 + rng.gen_range(-1.0..1.0), cx, rng.gen_range(3.5..4.5), w);
                ring(
                    &mut img,
                    19.0 + rng.gen_range(-1.0..1.0),
                    cx,
                    rng.gen_range(4.5..5.5),
                    w,
                );
            }
            0 => ring(&mut img, 14.0, cx, rng.gen_range(7.0..9.0), w),
            _ => bar(&mut img, cx, 4.0, 24.0, w),
        }
        images.push(img.iter().map(|v| (v * 255.0).round() as u8).collect());
        labels.push(label);
    }
    (images, labels)
}

/// Writes `images.idx` and `labels.idx` into `dir`.
pub fn write_synthetic_idx(dir: &Path, count: usize, seed: u64) -> std::io::Result<()> {
    let (images, labels) = synthetic_digits(count, seed);
    let (img, lab) = encode_idx(&images, SIDE, &labels);
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("images.idx"), img)?;
    std::fs::write(dir.join("labels.idx"), lab)
}

/// The digit-8 configuration with the given member count and iterations.
pub fn digit8_config(dir: &Path, members: usize, iterations: usize) -> freqext::Result<ExperimentConfig> {
    let text = format!(
        r#"
alpha = 4.0
seed = 8
pipeline = ["solve", "extrapolate"]

[domain]
dim = 2
shape = "annulus"
r_min = 0.5
r_max = 2.0

[family]
source = "idx"
images = "images.idx"
labels = "labels.idx"
digit = 8
count = {members}

[solver]
delta = 1e-6
tau_g = 0.15
tau_sigma = 0.75
iterations = {iterations}
w = {{ kind = "nuclear_ball", radius = 1.0 }}
rule = {{ kind = "monte_carlo", min_nodes = 500, max_nodes = 5000, growth = "geometric" }}

[extrapolate]
points = 65
known = {{ dim = 2, shape = "ball", radius = 2.0 }}
spatial_points = 28

[output]
dir = "out"
panel_points = 33
"#
    );
    ExperimentConfig::from_toml_str(&text, dir)
}

pub fn run_in(dir: &Path, members: usize, iterations: usize) -> freqext::Result<(ExperimentReport, ExperimentReport)> {
    write_synthetic_idx(dir, 4 * members, 11).map_err(|e| freqext::Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let cfg = digit8_config(dir, members, iterations)?;
    let report = run_experiment(&cfg)?;
    let filter = run_export_filter(&cfg)?;
    Ok((report, filter))
}

pub fn run_example() -> freqext::Result<()> {
    let dir = std::env::temp_dir().join("freqext_synthetic_mnist");
    let (report, filter) = run_in(&dir, 6, 20)?;
    for key in [
        "final_objective",
        "min_iterate_eigenvalue",
        "max_iterate_trace",
        "extrapolation_error",
        "known_only_error",
    ] {
        println!("{key}: {:.4e}", report.metric(key).unwrap_or(f64::NAN));
    }
    println!(
        "{} + {} artifacts under {}",
        report.entries.len(),
        filter.entries.len(),
        report.out_dir.display()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> freqext::Result<()> {
    run_example()
}
