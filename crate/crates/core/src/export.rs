//! Artifact export: CSV tables, PGM rasters and a hashed manifest.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::extrapolation::GridField;
use crate::hermitian::HermitianMatrix;
use crate::solver::SolverTrace;

pub const MANIFEST_NAME: &str = "manifest.sha256";
pub const PARTIAL_SUFFIX: &str = ".partial";

/// A numeric table with named, unit-annotated columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    columns: Vec<(String, String)>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new<S: Into<String>, U: Into<String>>(columns: impl IntoIterator<Item = (S, U)>) -> Self {
        Self {
            columns: columns.into_iter().map(|(n, u)| (n.into(), u.into())).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::DimensionMismatch {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// RFC 4180 text; the header reads `name [unit]`, numbers use the
    /// shortest round-trip representation.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<String> = self.columns.iter().map(|(n, u)| quote(&format!("{n} [{u}]"))).collect();
        out.push_str(&header.join(","));
        out.push_str("\r\n");
        for row in &self.rows {
            for (k, v) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v:?}");
            }
            out.push_str("\r\n");
        }
        out
    }
}

fn quote(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Node coordinates (`coord`, or `coord1`, `coord2`, … in several
/// dimensions) followed by real and imaginary parts.
pub fn field_table(field: &GridField, coord: &str, coord_unit: &str, value_unit: &str) -> Table {
    let d = field.dim();
    let mut cols: Vec<(String, String)> = if d == 1 {
        vec![(coord.into(), coord_unit.into())]
    } else {
        (1..=d)
            .map(|k| (format!("{coord}{k}"), coord_unit.to_string()))
            .collect()
    };
    cols.push(("re".into(), value_unit.into()));
    cols.push(("im".into(), value_unit.into()));
    let mut t = Table::new(cols);
    for (i, v) in field.values.iter().enumerate() {
        let mut row = field.geometry.node(i);
        row.push(v.re);
        row.push(v.im);
        t.rows.push(row);
    }
    t
}

/// One row per entry: `row, col, re, im`.
pub fn matrix_table(m: &HermitianMatrix) -> Table {
    let mut t = Table::new([("row", "index"), ("col", "index"), ("re", "1"), ("im", "1")]);
    let n = m.size();
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            t.rows.push(vec![i as f64, j as f64, z.re, z.im]);
        }
    }
    t
}

pub fn trace_table(trace: &SolverTrace) -> Table {
    let mut t = Table::new([
        ("iteration", "index"),
        ("objective", "1"),
        ("step", "frobenius"),
        ("nodes", "count"),
        ("sigma_norm", "frobenius"),
        ("sigma_trace", "1"),
        ("floor_events", "count"),
    ]);
    for r in &trace.records {
        t.rows.push(vec![
            r.iteration as f64,
            r.objective,
            r.step,
            r.nodes as f64,
            r.sigma_norm,
            r.sigma_trace,
            r.floor_events as f64,
        ]);
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitDepth {
    Eight,
    Sixteen,
}

/// Binary PGM (P5) of a row-major raster, mapping `[lo, hi]` linearly onto
/// the full gray range. Values outside are clipped; a degenerate range maps
/// to black.
pub fn pgm_bytes(width: usize, height: usize, values: &[f64], lo: f64, hi: f64, depth: BitDepth) -> Result<Vec<u8>> {
    if values.len() != width * height {
        return Err(Error::DimensionMismatch {
            expected: width * height,
            got: values.len(),
        });
    }
    let maxval: u32 = match depth {
        BitDepth::Eight => 255,
        BitDepth::Sixteen => 65535,
    };
    let mut out = format!("P5\n{width} {height}\n{maxval}\n").into_bytes();
    let span = hi - lo;
    for &v in values {
        let t = if span > 0.0 && v.is_finite() {
            ((v - lo) / span).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let q = (t * maxval as f64).round() as u32;
        match depth {
            BitDepth::Eight => out.push(q as u8),
            BitDepth::Sixteen => out.extend_from_slice(&(q as u16).to_be_bytes()),
        }
    }
    Ok(out)
}

/// PGM scaled to the data's own range.
pub fn pgm_autoscale(width: usize, height: usize, values: &[f64], depth: BitDepth) -> Result<Vec<u8>> {
    let lo = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::INFINITY, f64::min);
    let hi = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    pgm_bytes(width, height, values, lo, hi, depth)
}

/// White line plot of `ys` on black, `width` columns spanning the samples.
pub fn line_plot_pgm(ys: &[f64], width: usize, height: usize) -> Result<Vec<u8>> {
    if ys.is_empty() || width < 2 || height < 2 {
        return Err(Error::param("plot", "need samples and a raster of at least 2x2"));
    }
    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let row_of = |y: f64| ((hi - y) / span * (height - 1) as f64).round() as usize;
    let mut raster = vec![0.0; width * height];
    let mut prev: Option<usize> = None;
    for col in 0..width {
        let idx = col * (ys.len() - 1) / (width - 1);
        let r = row_of(ys[idx]).min(height - 1);
        let (a, b) = match prev {
            Some(p) => (p.min(r), p.max(r)),
            None => (r, r),
        };
        for row in a..=b {
            raster[row * width + col] = 1.0;
        }
        prev = Some(r);
    }
    pgm_bytes(width, height, &raster, 0.0, 1.0, BitDepth::Eight)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes artifacts under a root directory. Files are first written with a
/// `.partial` suffix and renamed on [`commit`](Self::commit); anything left
/// uncommitted keeps the suffix.
#[derive(Debug)]
pub struct ArtifactWriter {
    root: PathBuf,
    pending: Vec<(String, String)>,
    committed: Vec<(String, String)>,
}

impl ArtifactWriter {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Self {
            root,
            pending: Vec::new(),
            committed: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.root.join(format!("{name}{PARTIAL_SUFFIX}"));
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.pending.retain(|(n, _)| n != name);
        self.pending.push((name.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    pub fn write_table(&mut self, name: &str, table: &Table) -> Result<()> {
        self.write(name, table.to_csv().as_bytes())
    }

    /// Moves pending files to their final names.
    pub fn commit(&mut self) -> Result<()> {
        for (name, hash) in self.pending.drain(..) {
            let from = self.root.join(format!("{name}{PARTIAL_SUFFIX}"));
            let to = self.root.join(&name);
            fs::rename(&from, &to).map_err(|e| Error::io(&from, e))?;
            self.committed.retain(|(n, _)| *n != name);
            self.committed.push((name, hash));
        }
        Ok(())
    }

    /// Committed `(path, sha256)` pairs in write order.
    pub fn entries(&self) -> &[(String, String)] {
        &self.committed
    }

    /// Writes `manifest.sha256` with lines `sha256  path` and returns its text.
    pub fn write_manifest(&self) -> Result<String> {
        let text: String = self
            .committed
            .iter()
            .map(|(name, hash)| format!("{hash}  {name}\n"))
            .collect();
        let path = self.root.join(MANIFEST_NAME);
        fs::write(&path, &text).map_err(|e| Error::io(&path, e))?;
        Ok(text)
    }
}
