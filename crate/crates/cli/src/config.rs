//! The `key = value` run configuration.
//!
//! ```text
//! # comment
//! [grid]
//! x_min = -30
//! x_max = 30
//! n_points = 512
//!
//! [potential]
//! kind = reference
//!
//! [nonlinearity]
//! kind = feshbach_sextic
//! alpha = 1
//!
//! [run]
//! k_grid = linspace(-5, 5, 40)
//! ```
//!
//! Every key has a default; the resolved values are echoed into each output.

use std::collections::BTreeMap;

use dgl_core::evolve::Scheme;
use dgl_core::potential::Profile;
use dgl_core::{DglError, Grid, Nonlinearity, NonlinearityKind, PotentialPair, Stencil};

use crate::error::CliError;
use crate::output::fmt_f64;

const SECTIONS: [&str; 4] = ["grid", "potential", "nonlinearity", "run"];

fn known_keys(section: &str) -> &'static [&'static str] {
    match section {
        "grid" => &["x_min", "x_max", "n_points", "stencil"],
        "potential" => &["kind", "amplitude", "kappa"],
        "nonlinearity" => &["kind", "alpha", "alphas", "p"],
        "run" => &["k_grid", "a_values", "a_center", "dt", "t_final", "alpha_weight", "delta", "scheme", "seed"],
        _ => &[],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// `β = −0.6A sech²(κx/2)`, `γ = 0.3A sech²(κx/2)`.
    Reference,
    /// `β = 0`, `γ = −0.3A sech²(κx/2)`.
    Symmetric,
    Zero,
}

impl PotentialKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "reference" => Self::Reference,
            "symmetric" => Self::Symmetric,
            "zero" => Self::Zero,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Reference => "reference",
            Self::Symmetric => "symmetric",
            Self::Zero => "zero",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
    pub stencil: Stencil,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSection {
    pub kind: PotentialKind,
    pub amplitude: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySection {
    pub kind: NonlinearityKind,
    pub alphas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSection {
    pub k_grid: Vec<f64>,
    pub a_values: Vec<f64>,
    pub a_center: f64,
    pub dt: f64,
    pub t_final: f64,
    pub alpha_weight: f64,
    pub delta: f64,
    pub scheme: Scheme,
    pub seed: u64,
}

/// A parsed and validated configuration with every default resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSection,
    pub potential: PotentialSection,
    pub nonlinearity: NonlinearitySection,
    pub run: RunSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            grid: GridSection { x_min: -30.0, x_max: 30.0, n_points: 512, stencil: Stencil::Spectral },
            potential: PotentialSection { kind: PotentialKind::Reference, amplitude: 1.0, kappa: 2.0 },
            nonlinearity: NonlinearitySection { kind: NonlinearityKind::FeshbachSextic, alphas: vec![1.0] },
            run: RunSection {
                k_grid: linspace(-4.75, 4.75, 20),
                a_values: vec![0.01, 0.02, 0.04, 0.08],
                a_center: 0.5,
                dt: 0.02,
                t_final: 50.0,
                alpha_weight: dgl_core::evolve::DEFAULT_ALPHA,
                delta: 1e-2,
                scheme: Scheme::Rk4,
                seed: 0,
            },
        }
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect(),
    }
}

struct Entry {
    line: usize,
    value: String,
}

fn bad(line: usize, message: impl Into<String>) -> CliError {
    CliError::Parse { line, message: message.into() }
}

fn parse_f64(e: &Entry, key: &str) -> Result<f64, CliError> {
    let v: f64 = e.value.parse().map_err(|_| bad(e.line, format!("{key}: expected a number, got '{}'", e.value)))?;
    if !v.is_finite() {
        return Err(bad(e.line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn parse_list(e: &Entry, key: &str) -> Result<Vec<f64>, CliError> {
    let s = e.value.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    if let Some(inner) = s.strip_prefix("linspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad(e.line, format!("{key}: linspace takes (start, stop, count)")));
        }
        let num = |p: &str| p.parse::<f64>().ok().filter(|v| v.is_finite());
        let (Some(a), Some(b), Ok(n)) = (num(parts[0]), num(parts[1]), parts[2].parse::<usize>()) else {
            return Err(bad(e.line, format!("{key}: malformed linspace '{s}'")));
        };
        return Ok(linspace(a, b, n));
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(e.line, format!("{key}: '{}' is not a finite number", p.trim())))
        })
        .collect()
}

/// Parses and validates `text`.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut entries: BTreeMap<(String, String), Entry> = BTreeMap::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(name) = s.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| bad(line, format!("malformed section header '{s}'")))?.trim();
            if !SECTIONS.contains(&name) {
                return Err(bad(line, format!("unknown section [{name}] (expected one of grid, potential, nonlinearity, run)")));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = s.split_once('=') else {
            return Err(bad(line, format!("expected 'key = value', got '{s}'")));
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(sec) = &section else {
            return Err(bad(line, format!("key '{key}' appears before any section header")));
        };
        if !known_keys(sec).contains(&key) {
            return Err(bad(line, format!("unknown key '{key}' in [{sec}]")));
        }
        // an empty coefficient list is how `kind = none` echoes
        if value.is_empty() && key != "alphas" {
            return Err(bad(line, format!("key '{key}' has no value")));
        }
        if let Some(prev) = entries.insert((sec.clone(), key.to_string()), Entry { line, value: value.to_string() }) {
            return Err(bad(line, format!("duplicate key '{key}' in [{sec}] (first set on line {})", prev.line)));
        }
    }
    let get = |sec: &str, key: &str| entries.get(&(sec.to_string(), key.to_string()));

    let mut cfg = RunConfig::default();
    if let Some(e) = get("grid", "x_min") {
        cfg.grid.x_min = parse_f64(e, "x_min")?;
    }
    if let Some(e) = get("grid", "x_max") {
        cfg.grid.x_max = parse_f64(e, "x_max")?;
    }
    if let Some(e) = get("grid", "n_points") {
        cfg.grid.n_points =
            e.value.parse().map_err(|_| bad(e.line, format!("n_points: expected a non-negative integer, got '{}'", e.value)))?;
    }
    if let Some(e) = get("grid", "stencil") {
        cfg.grid.stencil =
            Stencil::parse(&e.value).ok_or_else(|| bad(e.line, format!("unknown stencil '{}' (fd2, fd4, spectral)", e.value)))?;
    }
    if let Some(e) = get("potential", "kind") {
        cfg.potential.kind = PotentialKind::parse(&e.value)
            .ok_or_else(|| bad(e.line, format!("unknown potential kind '{}' (reference, symmetric, zero)", e.value)))?;
    }
    if let Some(e) = get("potential", "amplitude") {
        cfg.potential.amplitude = parse_f64(e, "amplitude")?;
    }
    if let Some(e) = get("potential", "kappa") {
        cfg.potential.kappa = parse_f64(e, "kappa")?;
    }
    if let Some(e) = get("nonlinearity", "kind") {
        cfg.nonlinearity.kind = NonlinearityKind::parse(&e.value).ok_or_else(|| {
            bad(e.line, format!("unknown nonlinearity '{}' (bragg_quartic, gross_neveu, general_quartic, feshbach_sextic, none)", e.value))
        })?;
        cfg.nonlinearity.alphas = match cfg.nonlinearity.kind {
            NonlinearityKind::None => vec![],
            NonlinearityKind::GeneralQuartic => vec![1.0, 0.0, 0.0, 0.0],
            _ => vec![1.0],
        };
    }
    match (get("nonlinearity", "alpha"), get("nonlinearity", "alphas")) {
        (Some(_), Some(e)) => return Err(bad(e.line, "give either alpha or alphas, not both")),
        (Some(e), None) => cfg.nonlinearity.alphas = vec![parse_f64(e, "alpha")?],
        (None, Some(e)) => cfg.nonlinearity.alphas = parse_list(e, "alphas")?,
        (None, None) => {}
    }
    let r = &mut cfg.run;
    if let Some(e) = get("run", "k_grid") {
        r.k_grid = parse_list(e, "k_grid")?;
    }
    if let Some(e) = get("run", "a_values") {
        r.a_values = parse_list(e, "a_values")?;
    }
    for (key, slot) in [
        ("a_center", &mut r.a_center),
        ("dt", &mut r.dt),
        ("t_final", &mut r.t_final),
        ("alpha_weight", &mut r.alpha_weight),
        ("delta", &mut r.delta),
    ] {
        if let Some(e) = get("run", key) {
            *slot = parse_f64(e, key)?;
        }
    }
    if let Some(e) = get("run", "scheme") {
        r.scheme = Scheme::parse(&e.value).ok_or_else(|| bad(e.line, format!("unknown scheme '{}' (strang_split, rk4)", e.value)))?;
    }
    if let Some(e) = get("run", "seed") {
        r.seed = e.value.parse().map_err(|_| bad(e.line, format!("seed: expected a non-negative integer, got '{}'", e.value)))?;
    }

    cfg.validate()?;
    if let Some(e) = get("nonlinearity", "p") {
        let p: u32 = e.value.parse().map_err(|_| bad(e.line, format!("p: expected an integer, got '{}'", e.value)))?;
        let have = cfg.nonlinearity()?.degree_p();
        if p != have {
            return Err(CliError::Validation(format!(
                "Nonlinearity degree: p = {p} does not match {} (p = {have})",
                cfg.nonlinearity.kind.name()
            )));
        }
    }
    Ok(cfg)
}

impl RunConfig {
    /// Checks every section against the preconditions of the library types
    /// before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        let grid = self.grid()?;
        self.potential(&grid)?;
        self.nonlinearity()?;
        let r = &self.run;
        if r.a_values.is_empty() || r.a_values.iter().any(|a| *a <= 0.0) || r.a_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::Validation("Branch amplitudes: a_values must be positive and strictly increasing".into()));
        }
        if r.a_center <= 0.0 {
            return Err(CliError::Validation("Branch amplitudes: a_center must be positive".into()));
        }
        if r.k_grid.is_empty() {
            return Err(CliError::Validation("Scattering grid: k_grid is empty".into()));
        }
        if r.dt <= 0.0 || r.dt > 0.5 * grid.dx() {
            return Err(CliError::Validation(format!("Evolution step: dt = {} must lie in (0, dx/2] with dx = {}", r.dt, grid.dx())));
        }
        if r.t_final <= 0.0 {
            return Err(CliError::Validation("Evolution horizon: t_final must be positive".into()));
        }
        if r.alpha_weight < 0.0 {
            return Err(CliError::Validation("Norm weight: alpha_weight must be non-negative".into()));
        }
        if r.delta < 0.0 {
            return Err(CliError::Validation("Perturbation: delta must be non-negative".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid, DglError> {
        Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n_points)
    }

    pub fn potential(&self, grid: &Grid) -> Result<PotentialPair, DglError> {
        let p = &self.potential;
        match p.kind {
            PotentialKind::Reference => PotentialPair::sech2(grid, -0.6 * p.amplitude, 0.3 * p.amplitude, p.kappa),
            PotentialKind::Symmetric => PotentialPair::sech2(grid, 0.0, -0.3 * p.amplitude, p.kappa),
            // the certificate is still checked, so a bad kappa is reported
            PotentialKind::Zero => PotentialPair::new(grid, Profile::Zero, p.kappa, 1.0),
        }
    }

    pub fn nonlinearity(&self) -> Result<Nonlinearity, DglError> {
        Nonlinearity::from_kind(self.nonlinearity.kind, &self.nonlinearity.alphas)
    }

    /// `(section, [(key, value)])` with every value resolved, in file order.
    pub fn echo(&self) -> Vec<(&'static str, Vec<(&'static str, String)>)> {
        let list = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(", ");
        let (g, p, n, r) = (&self.grid, &self.potential, &self.nonlinearity, &self.run);
        let degree = self.nonlinearity().map(|nl| nl.degree_p().to_string()).unwrap_or_default();
        vec![
            (
                "grid",
                vec![
                    ("x_min", fmt_f64(g.x_min)),
                    ("x_max", fmt_f64(g.x_max)),
                    ("n_points", g.n_points.to_string()),
                    ("stencil", g.stencil.name().to_string()),
                ],
            ),
            ("potential", vec![("kind", p.kind.name().to_string()), ("amplitude", fmt_f64(p.amplitude)), ("kappa", fmt_f64(p.kappa))]),
            ("nonlinearity", vec![("kind", n.kind.name().to_string()), ("alphas", list(&n.alphas)), ("p", degree)]),
            (
                "run",
                vec![
                    ("k_grid", list(&r.k_grid)),
                    ("a_values", list(&r.a_values)),
                    ("a_center", fmt_f64(r.a_center)),
                    ("dt", fmt_f64(r.dt)),
                    ("t_final", fmt_f64(r.t_final)),
                    ("alpha_weight", fmt_f64(r.alpha_weight)),
                    ("delta", fmt_f64(r.delta)),
                    ("scheme", r.scheme.name().to_string()),
                    ("seed", r.seed.to_string()),
                ],
            ),
        ]
    }
}
