//! Pipeline driver: runs configured stages and writes their artifacts.
//!
//! Every stage writes into its own subdirectory of the output directory.
//! Files are committed when the stage succeeds; a failing stage leaves its
//! files with a `.partial` suffix. `manifest.sha256` lists every committed
//! file with its hash.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::Arc;

use log::info;
use num_complex::Complex64;

use crate::config::{ExperimentConfig, GpTarget, Stage};
use crate::domain::FrequencyDomain;
use crate::error::{Error, Result};
use crate::export::{
    field_table, line_plot_pgm, matrix_table, pgm_bytes, trace_table, ArtifactWriter, BitDepth, Table,
};
use crate::extrapolation::{
    extrapolate_field, extrapolation_error, fft_analysis, fft_spatial_geometry, gp_iterate, optimal_filter_hat,
    reconstruct_space_box, GridField, GridGeometry, LowSource, Piece,
};
use crate::family::FunctionFamily;
use crate::multiplier::{FrequencyMap, SigmaMultiplier};
use crate::multiresolution::{
    apply_boundary_window, cascade, periodization_phi, periodize_mask, rescale_mask, wavelet_hat, wavelet_mask,
    PeriodicMask,
};
use crate::quadrature::tensor_rule;
use crate::solver::{solve_observed, validate_params, ContractionDiagnostics, SolveOutput};

/// Names of the eight one-dimensional multiresolution panels, in figure order.
pub const CASCADE_PANELS: [&str; 8] = [
    "a_family",
    "b_multiplier",
    "c_phi_hat",
    "d_phi",
    "e_periodization",
    "f_wavelet_mask",
    "g_psi_hat",
    "h_psi",
];

/// Outcome of a run: committed artifacts and scalar metrics.
#[derive(Clone, Debug, Default)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    /// `(relative path, sha256)` in write order.
    pub entries: Vec<(String, String)>,
    pub metrics: Vec<(String, f64)>,
}

impl ExperimentReport {
    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn has_file(&self, name: &str) -> bool {
        self.entries.iter().any(|(n, _)| n == name)
    }
}

/// Per-iterate membership checks recorded during a solve.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateCheck {
    pub iteration: usize,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub in_w: bool,
}

struct Experiment<'a> {
    config: &'a ExperimentConfig,
    family: FunctionFamily,
    writer: ArtifactWriter,
    solved: Option<SolveOutput>,
    metrics: Vec<(String, f64)>,
}

impl<'a> Experiment<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        let family = config.family()?;
        let mut writer = ArtifactWriter::new(config.output_dir())?;
        writer.write("config.toml", config.to_toml_string()?.as_bytes())?;
        writer.commit()?;
        Ok(Self {
            config,
            family,
            writer,
            solved: None,
            metrics: Vec::new(),
        })
    }

    fn metric(&mut self, name: &str, value: f64) {
        self.metrics.push((name.to_string(), value));
    }

    fn depth(&self) -> BitDepth {
        if self.config.output.bit_depth == 16 {
            BitDepth::Sixteen
        } else {
            BitDepth::Eight
        }
    }

    fn write_summary(&mut self, name: &str, pairs: &[(&str, f64)]) -> Result<()> {
        let mut text = String::from("quantity [name],value [1]\r\n");
        for (k, v) in pairs {
            text.push_str(&format!("{k},{v:?}\r\n"));
        }
        self.writer.write(name, text.as_bytes())
    }

    /// CSV of a field plus, when enabled, rasters: a line plot of the real
    /// part in one dimension, magnitude and phase images in two.
    fn write_field(&mut self, name: &str, field: &GridField, coord_unit: &str, value_unit: &str) -> Result<()> {
        let coord = if coord_unit == "length" { "x" } else { "xi" };
        self.writer.write_table(
            &format!("{name}.csv"),
            &field_table(field, coord, coord_unit, value_unit),
        )?;
        if !self.config.output.pgm {
            return Ok(());
        }
        match field.dim() {
            1 => {
                let re: Vec<f64> = field.values.iter().map(|v| v.re).collect();
                self.writer
                    .write(&format!("{name}.pgm"), &line_plot_pgm(&re, 512, 256)?)?;
            }
            2 => {
                let (h, w) = (field.geometry.shape[0], field.geometry.shape[1]);
                let abs: Vec<f64> = field.values.iter().map(|v| v.norm()).collect();
                let hi = abs.iter().copied().fold(0.0, f64::max);
                let arg: Vec<f64> = field.values.iter().map(|v| v.arg()).collect();
                let depth = self.depth();
                self.writer
                    .write(&format!("{name}_abs.pgm"), &pgm_bytes(w, h, &abs, 0.0, hi, depth)?)?;
                self.writer
                    .write(&format!("{name}_phase.pgm"), &pgm_bytes(w, h, &arg, -PI, PI, depth)?)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn panel_grid(&self, domain: &FrequencyDomain) -> Result<GridGeometry> {
        let (_, hi) = domain.bounding_box();
        let half = hi.iter().copied().fold(0.0, f64::max);
        GridGeometry::symmetric(domain.dim(), self.config.output.panel_points, half)
    }

    fn solve(&mut self, record: bool) -> Result<()> {
        if self.solved.is_some() && !record {
            return Ok(());
        }
        let cfg = self.config.solver_config()?;
        let w = cfg.w;
        let n = self.family.len();
        let max_trace = w.max_trace(n);
        let mut checks = Vec::with_capacity(cfg.iterations);
        let mut failure = None;
        let out = solve_observed(&self.family, self.config.alpha, &self.config.domain, &cfg, |k, s| {
            let check = s
                .min_eigenvalue()
                .and_then(|lam| Ok((lam, w.contains(s, 1e-9)?)))
                .map(|(lam, in_w)| IterateCheck {
                    iteration: k,
                    min_eigenvalue: lam,
                    trace: s.trace(),
                    in_w,
                });
            match check {
                Ok(c) => checks.push(c),
                Err(e) => failure = failure.take().or(Some(e)),
            }
        })?;
        if let Some(e) = failure {
            return Err(e);
        }
        if record {
            self.writer.write_table("solve/sigma.csv", &matrix_table(&out.sigma))?;
            self.writer.write_table("solve/trace.csv", &trace_table(&out.trace))?;
            let mut t = Table::new([
                ("iteration", "index"),
                ("min_eigenvalue", "1"),
                ("trace", "1"),
                ("in_w", "bool"),
            ]);
            for c in &checks {
                t.push(vec![
                    c.iteration as f64,
                    c.min_eigenvalue,
                    c.trace,
                    f64::from(u8::from(c.in_w)),
                ])?;
            }
            self.writer.write_table("solve/iterates.csv", &t)?;
            let grid = self.panel_grid(&self.config.domain)?;
            let domain = self.config.domain.clone();
            let m = &out.multiplier;
            let field = GridField::from_fn(grid, |xi| {
                if domain.contains_unchecked(xi) {
                    m.eval(xi)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            });
            self.write_field("solve/multiplier", &field, "1/length", "1")?;
            let min_eig = checks.iter().map(|c| c.min_eigenvalue).fold(f64::INFINITY, f64::min);
            let max_tr = checks.iter().map(|c| c.trace).fold(f64::NEG_INFINITY, f64::max);
            let all_in_w = checks.iter().all(|c| c.in_w);
            let finite = out.trace.objectives().iter().all(|o| o.is_finite());
            let last = out.trace.records.last();
            let summary = [
                ("members", n as f64),
                ("iterations", out.trace.len() as f64),
                ("final_objective", last.map_or(f64::NAN, |r| r.objective)),
                ("final_step", last.map_or(f64::NAN, |r| r.step)),
                ("min_iterate_eigenvalue", min_eig),
                ("max_iterate_trace", max_tr),
                ("max_trace_of_w", max_trace),
                ("all_iterates_in_w", f64::from(u8::from(all_in_w))),
                ("objectives_finite", f64::from(u8::from(finite))),
            ];
            self.write_summary("solve/summary.csv", &summary)?;
            for (k, v) in summary {
                self.metric(k, v);
            }
        }
        self.solved = Some(out);
        Ok(())
    }

    fn multiplier(&mut self) -> Result<SigmaMultiplier> {
        self.solve(false)?;
        Ok(self.solved.as_ref().expect("solved above").multiplier.clone())
    }

    fn extrapolate(&mut self) -> Result<()> {
        let m = self.multiplier()?;
        let cfg = self.config;
        let alpha = cfg.alpha;
        let omega0 = &cfg.domain;
        let known = cfg.extrapolate.known.clone().unwrap_or_else(|| omega0.clone());
        let member = cfg.extrapolate.member;
        cfg.member_coeffs(self.family.len(), member)?;
        let single = FunctionFamily::new(vec![self.family.members()[member].clone()])?;
        let low = LowSource::exact(single.clone(), vec![Complex64::new(1.0, 0.0)])?;

        let dilated = omega0.dilate(alpha)?;
        let reach = |d: &FrequencyDomain| d.bounding_box().1.iter().copied().fold(0.0, f64::max);
        let half = reach(&dilated).max(reach(&known));
        let d = omega0.dim();
        let target = GridGeometry::symmetric(d, cfg.extrapolate.points, half)?;
        let pred = extrapolate_field(&[Piece::new(&m, omega0)], &low, alpha, &known, &target)?;
        let truth = GridField::from_fn(target.clone(), |xi| single.eval(xi)[0]);
        let given = truth.restrict(&known)?;
        let err = extrapolation_error(&pred, &truth, &dilated)?;
        let low_err = extrapolation_error(&given, &truth, &dilated)?;

        self.write_field("extrapolate/extrapolated", &pred, "1/length", "length")?;
        self.write_field("extrapolate/truth", &truth, "1/length", "length")?;
        self.write_field("extrapolate/known", &given, "1/length", "length")?;
        let s = cfg.extrapolate.spatial_points;
        let (lo, hi) = (vec![0.0; d], vec![1.0; d]);
        for (name, field) in [
            ("space_extrapolated", &pred),
            ("space_truth", &truth),
            ("space_known", &given),
        ] {
            let u = reconstruct_space_box(field, &lo, &hi, &vec![s; d])?;
            self.write_field(&format!("extrapolate/{name}"), &u, "length", "1")?;
        }
        self.write_summary(
            "extrapolate/summary.csv",
            &[("relative_error_dilated", err), ("relative_error_known_only", low_err)],
        )?;
        self.metric("extrapolation_error", err);
        self.metric("known_only_error", low_err);
        Ok(())
    }

    fn export_filter(&mut self) -> Result<()> {
        let m = self.multiplier()?;
        let cfg = self.config;
        let grid = self.panel_grid(&cfg.domain)?;
        let eta = optimal_filter_hat(&m, &cfg.domain, cfg.alpha, &grid)?;
        self.write_field("export_filter/filter_hat", &eta, "1/length", "1")?;
        let d = cfg.domain.dim();
        let s = cfg.extrapolate.spatial_points;
        let space = reconstruct_space_box(&eta, &vec![-0.5; d], &vec![0.5; d], &vec![s; d])?;
        self.write_field("export_filter/filter", &space, "length", "1/length^d")?;
        self.metric("filter_sup", eta.sup_norm());
        Ok(())
    }

    fn cascade(&mut self) -> Result<()> {
        let cfg = self.config;
        let cc = &cfg.cascade;
        if cfg.domain.dim() != 1 {
            return Err(Error::Config("the multiresolution pipeline is one-dimensional".into()));
        }
        let m = self.multiplier()?;
        let exact = PeriodicMask::exact(
            Arc::new(rescale_mask(apply_boundary_window(m, cc.window_order), cc.rescale)),
            1,
        );
        let mask = periodize_mask(&exact, 1, cc.mask_resolution)?;
        let grid = GridGeometry::new(
            vec![cc.grid_points],
            vec![2.0 * cc.half_width / cc.grid_points as f64],
            vec![-cc.half_width],
        )?;
        let phi_hat = cascade(&mask, cc.products, &grid)?;
        let phi_per = periodization_phi(&phi_hat, cc.terms, cc.phi_resolution)?;
        let g = wavelet_mask(&mask, &phi_per)?;
        let psi_hat = wavelet_hat(&g, &phi_hat, &grid)?;

        let unit = GridGeometry::new(
            vec![cc.phi_resolution],
            vec![1.0 / cc.phi_resolution as f64],
            vec![-0.5],
        )?;
        let sample = |p: &dyn FrequencyMap| GridField::from_fn(unit.clone(), |xi| p.eval(xi));

        let panel = self.panel_grid(&cfg.domain)?;
        let mut members = Table::new(std::iter::once(("xi".to_string(), "1/length".to_string())).chain(
            (0..self.family.len()).flat_map(|k| {
                [
                    (format!("re_{k}"), "length".to_string()),
                    (format!("im_{k}"), "length".to_string()),
                ]
            }),
        ));
        for i in 0..panel.len() {
            let xi = panel.node(i);
            let mut row = xi.clone();
            for v in self.family.eval(&xi).iter() {
                row.push(v.re);
                row.push(v.im);
            }
            members.push(row)?;
        }
        self.writer.write_table("cascade/a_family.csv", &members)?;
        if cfg.output.pgm {
            let first: Vec<f64> = (0..panel.len())
                .map(|i| self.family.eval(&panel.node(i))[0].re)
                .collect();
            self.writer
                .write("cascade/a_family.pgm", &line_plot_pgm(&first, 512, 256)?)?;
        }
        self.write_field("cascade/b_multiplier", &sample(&mask), "1/length", "1")?;
        self.write_field("cascade/c_phi_hat", &phi_hat.grid, "1/length", "length")?;
        let w = cc.spatial_half_width;
        let phi = reconstruct_space_box(&phi_hat.grid, &[-w], &[w], &[cc.spatial_points])?;
        self.write_field("cascade/d_phi", &phi, "length", "1")?;
        self.write_field("cascade/e_periodization", &sample(&phi_per), "1/length", "1")?;
        self.write_field("cascade/f_wavelet_mask", &sample(&g), "1/length", "1")?;
        self.write_field("cascade/g_psi_hat", &psi_hat, "1/length", "length")?;
        let psi = reconstruct_space_box(&psi_hat, &[-w], &[w], &[cc.spatial_points])?;
        self.write_field("cascade/h_psi", &psi, "length", "1")?;

        let refinement = [-1.7, -0.3, 0.45, 2.2]
            .iter()
            .map(|&x| (phi_hat.eval(&[2.0 * x]) - mask.eval(&[x]) * phi_hat.eval(&[x])).norm())
            .fold(0.0, f64::max);
        let summary = [
            ("products", cc.products as f64),
            ("last_increment", phi_hat.increment()),
            ("zero_set_hits", phi_hat.zero_set_hits as f64),
            ("refinement_residual", refinement),
            ("phi_hat_at_zero", phi_hat.eval(&[0.0]).re),
        ];
        self.write_summary("cascade/summary.csv", &summary)?;
        for (k, v) in summary {
            self.metric(k, v);
        }
        Ok(())
    }

    fn baseline_gp(&mut self) -> Result<()> {
        let cfg = self.config;
        let gp = &cfg.gp;
        let d = cfg.domain.dim();
        let omega0 = gp.omega0.clone().unwrap_or_else(|| cfg.domain.clone());
        let freq = GridGeometry::fft(d, gp.points, gp.spacing)?;
        let truth = match gp.target {
            GpTarget::Hat => {
                let space = fft_spatial_geometry(&freq)?;
                let u = GridField::from_fn(space, |x| {
                    Complex64::new(x.iter().map(|&t| (1.0 - (2.0 * t - 1.0).abs()).max(0.0)).product(), 0.0)
                });
                fft_analysis(&u, &freq)?
            }
            GpTarget::Member { index } => {
                cfg.member_coeffs(self.family.len(), index)?;
                let spec = self.family.members()[index].clone();
                GridField::from_fn(freq.clone(), |xi| spec.eval(xi))
            }
        };
        let q_lo = vec![gp.q_lo; d];
        let q_hi = vec![gp.q_hi; d];
        let res = gp_iterate(&truth, &omega0, &q_lo, &q_hi, gp.steps)?;
        let mut t = Table::new([("step", "index"), ("residual", "l2")]);
        for (k, r) in res.residuals.iter().enumerate() {
            t.push(vec![(k + 1) as f64, *r])?;
        }
        self.writer.write_table("baseline_gp/residuals.csv", &t)?;
        self.write_field("baseline_gp/field", &res.field, "1/length", "length")?;
        let dilated = omega0.dilate(cfg.alpha)?;
        let err = extrapolation_error(&res.field, &truth, &dilated)?;
        let last = res.residuals.last().copied().unwrap_or(0.0);
        let monotone = res.residuals.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12));
        let summary = [
            ("steps", gp.steps as f64),
            ("final_residual", last),
            ("residuals_nonincreasing", f64::from(u8::from(monotone))),
            ("relative_error_dilated", err),
        ];
        self.write_summary("baseline_gp/summary.csv", &summary)?;
        self.metric("gp_final_residual", last);
        self.metric("gp_nonincreasing", f64::from(u8::from(monotone)));
        self.metric("gp_error", err);
        Ok(())
    }

    fn validate_params(&mut self) -> Result<ContractionDiagnostics> {
        let cfg = self.config;
        let solver = cfg.solver_config()?;
        let probe = tensor_rule(&cfg.domain, cfg.solver.probe_resolution)?;
        let diag = validate_params(&self.family, cfg.alpha, &cfg.domain, &solver, &probe)?;
        let summary = [
            ("trace_bound", diag.trace_bound),
            ("kappa", diag.kappa),
            ("r_m", diag.r_m),
            ("l_m", diag.l_m),
            ("r_f", diag.r_f),
            ("bound", diag.bound),
            ("satisfied", f64::from(u8::from(diag.satisfied))),
        ];
        self.write_summary("validate_params/params.csv", &summary)?;
        for (k, v) in summary {
            self.metric(k, v);
        }
        Ok(diag)
    }

    fn run_step<T>(&mut self, name: &str, step: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        info!("stage {name}");
        match step(self) {
            Ok(v) => {
                self.writer.commit()?;
                Ok(v)
            }
            Err(e) => {
                self.writer.write_manifest()?;
                Err(Error::Stage {
                    stage: name.to_string(),
                    source: Box::new(e),
                })
            }
        }
    }

    fn finish(self) -> Result<ExperimentReport> {
        self.writer.write_manifest()?;
        Ok(ExperimentReport {
            out_dir: self.writer.root().to_path_buf(),
            entries: self.writer.entries().to_vec(),
            metrics: self.metrics,
        })
    }
}

fn run_stage(exp: &mut Experiment<'_>, stage: Stage) -> Result<()> {
    exp.run_step(stage.name(), |e| match stage {
        Stage::Solve => e.solve(true),
        Stage::Extrapolate => e.extrapolate(),
        Stage::Cascade => e.cascade(),
        Stage::BaselineGp => e.baseline_gp(),
    })
}

/// Runs `stages` in order.
pub fn run_stages(config: &ExperimentConfig, stages: &[Stage]) -> Result<ExperimentReport> {
    let mut exp = Experiment::new(config)?;
    for &stage in stages {
        run_stage(&mut exp, stage)?;
    }
    exp.finish()
}

/// Runs the pipeline named in the config.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    run_stages(config, &config.pipeline)
}

/// Contraction check for the solver parameters, written to `validate_params/params.csv`.
pub fn run_validate_params(config: &ExperimentConfig) -> Result<(ContractionDiagnostics, ExperimentReport)> {
    let mut exp = Experiment::new(config)?;
    let diag = exp.run_step("validate_params", |e| e.validate_params())?;
    Ok((diag, exp.finish()?))
}

/// Solves, then writes the optimal detail filter in frequency and space.
pub fn run_export_filter(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut exp = Experiment::new(config)?;
    run_stage(&mut exp, Stage::Solve)?;
    exp.run_step("export_filter", |e| e.export_filter())?;
    exp.finish()
}
