//! Plain-text artifacts: `.dat` tables, run configuration files and VTK snapshots.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::assembly::{Basis, Discretization};
use crate::element;
use crate::geometry::NormalMode;
use crate::verification::{CaseKind, SolverSettings, StudyConfig};
use crate::{Error, Result, Vec3};

/// Whitespace-separated numeric table with a one-line header.
#[derive(Debug, Clone, PartialEq)]
pub struct DatTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DatTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    /// `level` is written as an integer, everything else as `{:.5e}`.
    pub fn to_text(&self) -> String {
        let mut s = self.columns.join(" ");
        s.push('\n');
        for row in &self.rows {
            for (i, (name, v)) in self.columns.iter().zip(row).enumerate() {
                if i > 0 {
                    s.push(' ');
                }
                if name == "level" && v.fract() == 0.0 && v.abs() < 1e15 {
                    let _ = write!(s, "{}", *v as i64);
                } else {
                    let _ = write!(s, "{v:.5e}");
                }
            }
            s.push('\n');
        }
        s
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Parses the format written by [`Self::to_text`]. Blank lines are skipped; the first
    /// non-blank line is the header.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let columns: Vec<String> = header.split_whitespace().map(str::to_string).collect();
        for (i, c) in columns.iter().enumerate() {
            if c.parse::<f64>().is_ok() {
                return Err(Error::Parse {
                    line: hline + 1,
                    message: format!("header entry '{c}' is numeric"),
                });
            }
            if columns[..i].contains(c) {
                return Err(Error::Parse {
                    line: hline + 1,
                    message: format!("duplicate column '{c}'"),
                });
            }
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<f64>().map_err(|_| Error::Parse {
                        line: idx + 1,
                        message: format!("not a number: '{tok}'"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            if row.len() != columns.len() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, found {}", columns.len(), row.len()),
                });
            }
            rows.push(row);
        }
        Ok(Self { columns, rows })
    }
}

/// Settings of one CLI run. Text form: one `key=value` per line, `#` starts a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: CaseKind,
    pub k: usize,
    pub l: usize,
    pub alpha: f64,
    pub c: f64,
    pub levels: Vec<u32>,
    pub normals: NormalMode,
    pub outer_rtol: f64,
    pub inner_rtol: f64,
    pub max_iterations: usize,
    pub output: PathBuf,
    pub vtk: bool,
    pub parallel: bool,
    /// Print residual histories.
    pub verbose: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            case: CaseKind::Sphere,
            k: 1,
            l: 1,
            alpha: 0.0,
            c: 1.0,
            levels: (1..=4).collect(),
            normals: NormalMode::Interpolated,
            outer_rtol: 1e-6,
            inner_rtol: 1e-4,
            max_iterations: 2000,
            output: PathBuf::from("."),
            vtk: false,
            parallel: false,
            verbose: false,
        }
    }
}

pub const MAX_LEVEL: u32 = 6;

fn parse_bool(v: &str) -> Option<bool> {
    match v {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

/// `3`, `1..4` (inclusive), or `1,2,5`.
pub fn parse_levels(v: &str) -> Option<Vec<u32>> {
    if let Some((a, b)) = v.split_once("..") {
        let a: u32 = a.trim().parse().ok()?;
        let b: u32 = b.trim().trim_start_matches('=').parse().ok()?;
        if a > b || b - a > 64 {
            return None;
        }
        return Some((a..=b).collect());
    }
    v.split(',').map(|t| t.trim().parse().ok()).collect()
}

impl RunConfig {
    /// Sets one key; unknown keys and malformed values are configuration errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || Error::Config(format!("invalid value '{value}' for key '{key}'"));
        let num = || value.parse::<f64>().map_err(|_| bad());
        let int = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "case" => self.case = CaseKind::parse(value).ok_or_else(bad)?,
            "k" => self.k = int()?,
            "l" => self.l = int()?,
            "alpha" => self.alpha = num()?,
            "c" => self.c = num()?,
            "levels" => self.levels = parse_levels(value).ok_or_else(bad)?,
            "normals" => {
                self.normals = match value {
                    "exact" => NormalMode::Exact,
                    "interpolated" => NormalMode::Interpolated,
                    _ => return Err(bad()),
                }
            }
            "outer_rtol" => self.outer_rtol = num()?,
            "inner_rtol" => self.inner_rtol = num()?,
            "maxit" => self.max_iterations = int()?,
            "output" => self.output = PathBuf::from(value),
            "vtk" => self.vtk = parse_bool(value).ok_or_else(bad)?,
            "parallel" => self.parallel = parse_bool(value).ok_or_else(bad)?,
            "verbose" => self.verbose = parse_bool(value).ok_or_else(bad)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Applies a `key=value` token.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got '{pair}'")))?;
        self.set(k.trim(), v.trim())
    }

    /// Applies every assignment of a config file on top of `self`.
    pub fn merge_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            self.set_pair(line).map_err(|e| match e {
                Error::Config(m) => Error::Parse { line: i + 1, message: m },
                other => other,
            })?;
        }
        Ok(())
    }

    /// Parses a config file on top of the defaults and validates it.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = Self::default();
        c.merge_text(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(1 <= self.l && self.l <= self.k && self.k <= 2) {
            return fail(format!("degrees must satisfy 1 <= l <= k <= 2, got k={} l={}", self.k, self.l));
        }
        if !(0.0..=2.0).contains(&self.alpha) {
            return fail(format!("alpha must lie in [0, 2], got {}", self.alpha));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return fail(format!("c must be positive, got {}", self.c));
        }
        if self.levels.is_empty() || self.levels.iter().any(|&l| !(1..=MAX_LEVEL).contains(&l)) {
            return fail(format!("levels must be a non-empty subset of 1..{MAX_LEVEL}"));
        }
        for (name, v) in [("outer_rtol", self.outer_rtol), ("inner_rtol", self.inner_rtol)] {
            if !(v > 0.0 && v < 1.0) {
                return fail(format!("{name} must lie in (0, 1), got {v}"));
            }
        }
        if self.max_iterations == 0 {
            return fail("maxit must be positive".into());
        }
        Ok(())
    }

    pub fn study(&self) -> StudyConfig {
        StudyConfig {
            case: self.case,
            velocity_degree: self.k,
            multiplier_degree: self.l,
            alpha: self.alpha,
            c: self.c,
            levels: self.levels.clone(),
            normal_mode: self.normals,
            solver: SolverSettings {
                outer_rtol: self.outer_rtol,
                inner_rtol: self.inner_rtol,
                max_iterations: self.max_iterations,
                ..SolverSettings::default()
            },
            parallel: self.parallel,
            output_dir: Some(self.output.clone()),
        }
    }
}

/// Γ_h with `u_h`, its normal part and `λ_h` sampled at the triangle vertices.
pub fn write_solution_vtk<W: Write>(disc: &Discretization, u: &[f64], lambda: &[f64], out: &mut W) -> Result<()> {
    let (k, l) = (disc.velocity.degree, disc.multiplier.degree);
    let mut vel = Vec::new();
    let mut un = Vec::new();
    let mut lam = Vec::new();
    for tri in &disc.surface.triangles {
        let geo = &disc.geometries[tri.cell];
        let udofs = &disc.velocity.cell_dofs[tri.cell];
        let ldofs = &disc.multiplier.cell_dofs[tri.cell];
        for x in &tri.vertices {
            let bary = geo.barycentric(x);
            let bu = Basis::eval(k, &bary, geo);
            let bl = Basis::eval(l, &bary, geo);
            let mut v = Vec3::zeros();
            for i in 0..element::local_dofs(k) {
                for a in 0..3 {
                    v[a] += u[3 * udofs[i] + a] * bu.vals[i];
                }
            }
            let lv: f64 = (0..element::local_dofs(l)).map(|i| lambda[ldofs[i]] * bl.vals[i]).sum();
            un.push(v.dot(&disc.normals.normal(tri.cell, x)));
            vel.push(v);
            lam.push(lv);
        }
    }
    disc.surface
        .write_vtk(out, &[("u_h", vel)], &[("u_h_normal", un), ("lambda_h", lam)])?;
    Ok(())
}
