//! The `version = 1` TOML run configuration shared by every subcommand.
//!
//! Parsing walks the document by hand rather than through serde so that
//! every problem (unknown key, wrong type, missing field, failed check) is
//! reported at once.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use kslab_core::burgers::{EntropyKind, TestFunction};
use kslab_core::datum::{default_mollification_width, DatumKind, InitialDatum};
use kslab_core::grid::Grid;
use kslab_core::limit::{Coupling, Mollification, Reference, SweepConfig, Window};
use kslab_core::params::{coupling_beta, energy_preserving_coefficients, KsParams};
use kslab_core::solver::{SolverConfig, DEFAULT_DEALIAS_FRACTION};
use toml::{Table, Value};

/// Only supported schema version.
pub const SCHEMA_VERSION: i64 = 1;

/// Every problem found in a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.0.len())?;
        for e in &self.0 {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSection {
    pub half_length: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsSection {
    pub a: f64,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub d: f64,
    pub eps: Option<f64>,
    pub beta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Width {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone)]
pub struct DatumSection {
    pub kind: DatumKind,
    pub mollification_width: Width,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSection {
    pub t_final: Option<f64>,
    pub snapshot_times: Option<Vec<f64>>,
    pub snapshot_interval: Option<f64>,
    pub cfl_advective: f64,
    pub cfl_dispersive: f64,
    pub dealias_fraction: f64,
    pub allow_nonconservative: bool,
    pub max_steps: Option<usize>,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            t_final: None,
            snapshot_times: None,
            snapshot_interval: None,
            cfl_advective: 0.5,
            cfl_dispersive: 0.25,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
            allow_nonconservative: false,
            max_steps: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSection {
    pub eps: Vec<f64>,
    pub coupling_c: f64,
    pub coupling: Coupling,
    pub window: Window,
    pub window_samples: usize,
    pub p: Vec<f64>,
    pub reference: Reference,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropySection {
    pub pairs: Vec<EntropyKind>,
    pub test_functions: Vec<TestFunction>,
    pub tolerance: Option<f64>,
    /// Uniform time samples used for the space-time residuals.
    pub time_samples: usize,
}

/// A parsed configuration. Sections are optional here; each subcommand
/// asks for the ones it needs.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: Option<GridSection>,
    pub params: Option<ParamsSection>,
    pub datum: Option<DatumSection>,
    pub solver: Option<SolverSection>,
    pub sweep: Option<SweepSection>,
    pub entropy: Option<EntropySection>,
    /// The document as read.
    pub source: String,
}

struct Reader<'a> {
    section: &'static str,
    table: &'a Table,
    used: BTreeSet<&'static str>,
}

impl<'a> Reader<'a> {
    fn new(section: &'static str, table: &'a Table) -> Self {
        Self {
            section,
            table,
            used: BTreeSet::new(),
        }
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.get(key)
    }

    fn opt_f64(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<f64> {
        let section = self.section;
        match self.raw(key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                errs.push(format!(
                    "[{section}] {key}: expected a number, got {}",
                    other.type_str()
                ));
                None
            }
        }
    }

    fn f64(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<f64> {
        if self.table.get(key).is_none() {
            self.used.insert(key);
            errs.push(format!("[{}] missing required key `{key}`", self.section));
            return None;
        }
        self.opt_f64(key, errs)
    }

    fn opt_usize(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<usize> {
        let section = self.section;
        match self.raw(key)? {
            Value::Integer(v) if *v >= 0 => Some(*v as usize),
            other => {
                errs.push(format!(
                    "[{section}] {key}: expected a non-negative integer, got {other}"
                ));
                None
            }
        }
    }

    fn opt_bool(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<bool> {
        let section = self.section;
        match self.raw(key)? {
            Value::Boolean(v) => Some(*v),
            other => {
                errs.push(format!(
                    "[{section}] {key}: expected true or false, got {other}"
                ));
                None
            }
        }
    }

    fn opt_str(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<&'a str> {
        let section = self.section;
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            other => {
                errs.push(format!("[{section}] {key}: expected a string, got {other}"));
                None
            }
        }
    }

    fn opt_f64_list(&mut self, key: &'static str, errs: &mut Vec<String>) -> Option<Vec<f64>> {
        let section = self.section;
        let Value::Array(items) = self.raw(key)? else {
            errs.push(format!("[{section}] {key}: expected an array of numbers"));
            return None;
        };
        let mut out = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Value::Float(v) => out.push(*v),
                Value::Integer(v) => out.push(*v as f64),
                other => {
                    errs.push(format!("[{section}] {key}: non-numeric entry {other}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    fn finish(self, errs: &mut Vec<String>) {
        for key in self.table.keys() {
            if !self.used.contains(key.as_str()) {
                errs.push(format!("[{}] unknown key `{key}`", self.section));
            }
        }
    }
}

fn section<'a>(root: &'a Table, name: &str, errs: &mut Vec<String>) -> Option<&'a Table> {
    match root.get(name)? {
        Value::Table(t) => Some(t),
        _ => {
            errs.push(format!("`{name}` must be a table"));
            None
        }
    }
}

fn parse_grid(t: &Table, errs: &mut Vec<String>) -> Option<GridSection> {
    let mut r = Reader::new("grid", t);
    let half_length = r.f64("half_length", errs);
    let n_points = if t.contains_key("n_points") {
        r.opt_usize("n_points", errs)
    } else {
        r.used.insert("n_points");
        errs.push("[grid] missing required key `n_points`".into());
        None
    };
    r.finish(errs);
    let g = GridSection {
        half_length: half_length?,
        n_points: n_points?,
    };
    if let Err(e) = Grid::new(g.half_length, g.n_points) {
        errs.push(format!("[grid] {e}"));
        return None;
    }
    Some(g)
}

fn parse_params(t: &Table, errs: &mut Vec<String>) -> Option<ParamsSection> {
    let mut r = Reader::new("params", t);
    let a = r.f64("a", errs);
    let b = r.opt_f64("b", errs);
    let c = r.opt_f64("c", errs);
    let d = r.opt_f64("d", errs).unwrap_or(0.0);
    let eps = r.opt_f64("eps", errs);
    let beta = r.opt_f64("beta", errs);
    r.finish(errs);
    if let Some(e) = eps {
        if !(e >= 0.0 && e.is_finite()) {
            errs.push(format!("[params] eps must be >= 0, got {e}"));
        }
        if e == 0.0 && beta.is_some_and(|b| b > 0.0) {
            errs.push(
                "[params] eps = 0 with beta > 0 is rejected: the coupling beta = c eps^4 is undefined"
                    .into(),
            );
        }
    }
    if let Some(b) = beta {
        if !(b >= 0.0 && b.is_finite()) {
            errs.push(format!("[params] beta must be >= 0, got {b}"));
        }
    }
    if b.is_some() != c.is_some() {
        errs.push("[params] give both `b` and `c` or neither".into());
    }
    Some(ParamsSection {
        a: a?,
        b,
        c,
        d,
        eps,
        beta,
    })
}

fn parse_datum(t: &Table, errs: &mut Vec<String>) -> Option<DatumSection> {
    let mut r = Reader::new("datum", t);
    let kind = r.opt_str("kind", errs);
    let width = match r.raw("mollification_width") {
        None => Some(Width::Auto),
        Some(Value::String(s)) if s == "auto" => Some(Width::Auto),
        Some(Value::Float(v)) if *v > 0.0 => Some(Width::Fixed(*v)),
        Some(Value::Integer(v)) if *v > 0 => Some(Width::Fixed(*v as f64)),
        Some(other) => {
            errs.push(format!(
                "[datum] mollification_width must be a positive number or \"auto\", got {other}"
            ));
            None
        }
    };
    let parsed = match kind {
        Some("riemann_step") => {
            let u_left = r.f64("u_left", errs);
            let u_right = r.f64("u_right", errs);
            let position = r.opt_f64("position", errs).unwrap_or(0.0);
            let extent = r.f64("extent", errs);
            let transition_width = r.opt_f64("transition_width", errs).unwrap_or(0.0);
            match (u_left, u_right, extent) {
                (Some(u_left), Some(u_right), Some(extent)) => Some(DatumKind::RiemannStep {
                    u_left,
                    u_right,
                    position,
                    extent,
                    transition_width,
                }),
                _ => None,
            }
        }
        Some("gaussian") => {
            let amplitude = r.f64("amplitude", errs);
            let center = r.opt_f64("center", errs).unwrap_or(0.0);
            let width = r.f64("width", errs);
            match (amplitude, width) {
                (Some(amplitude), Some(width)) => Some(DatumKind::Gaussian {
                    amplitude,
                    center,
                    width,
                }),
                _ => None,
            }
        }
        Some(other) => {
            errs.push(format!(
                "[datum] kind must be \"riemann_step\" or \"gaussian\", got \"{other}\""
            ));
            None
        }
        None => {
            errs.push("[datum] missing required key `kind`".into());
            None
        }
    };
    r.finish(errs);
    Some(DatumSection {
        kind: parsed?,
        mollification_width: width?,
    })
}

fn parse_solver(t: &Table, errs: &mut Vec<String>) -> Option<SolverSection> {
    let mut r = Reader::new("solver", t);
    let d = SolverSection::default();
    let s = SolverSection {
        t_final: r.opt_f64("t_final", errs),
        snapshot_times: r.opt_f64_list("snapshot_times", errs),
        snapshot_interval: r.opt_f64("snapshot_interval", errs),
        cfl_advective: r.opt_f64("cfl_advective", errs).unwrap_or(d.cfl_advective),
        cfl_dispersive: r
            .opt_f64("cfl_dispersive", errs)
            .unwrap_or(d.cfl_dispersive),
        dealias_fraction: r
            .opt_f64("dealias_fraction", errs)
            .unwrap_or(d.dealias_fraction),
        allow_nonconservative: r.opt_bool("allow_nonconservative", errs).unwrap_or(false),
        max_steps: r.opt_usize("max_steps", errs),
    };
    r.finish(errs);
    if s.snapshot_times.is_some() && s.snapshot_interval.is_some() {
        errs.push("[solver] give `snapshot_times` or `snapshot_interval`, not both".into());
    }
    if let Some(dt) = s.snapshot_interval {
        if dt.is_nan() || dt <= 0.0 {
            errs.push(format!(
                "[solver] snapshot_interval must be positive, got {dt}"
            ));
        }
    }
    Some(s)
}

fn parse_sweep(t: &Table, errs: &mut Vec<String>) -> Option<SweepSection> {
    let mut r = Reader::new("sweep", t);
    let eps = r.opt_f64_list("eps", errs);
    if eps.is_none() && !t.contains_key("eps") {
        errs.push("[sweep] missing required key `eps`".into());
    }
    let coupling_c = r.opt_f64("coupling_c", errs).unwrap_or(1.0);
    let coupling = match r.opt_str("coupling", errs).unwrap_or("quartic") {
        "quartic" => Some(Coupling::Quartic),
        "linear" => Some(Coupling::Linear),
        other => {
            errs.push(format!(
                "[sweep] coupling must be \"quartic\" or \"linear\", got \"{other}\""
            ));
            None
        }
    };
    let allow_violation = r
        .opt_bool("allow_coupling_violation", errs)
        .unwrap_or(false);
    if coupling == Some(Coupling::Linear) && !allow_violation {
        errs.push(
            "[sweep] coupling = \"linear\" violates beta = O(eps^4); set allow_coupling_violation = true to run it anyway"
                .into(),
        );
    }
    let pair = |r: &mut Reader, key: &'static str, errs: &mut Vec<String>| -> Option<(f64, f64)> {
        match r.opt_f64_list(key, errs) {
            Some(v) if v.len() == 2 => Some((v[0], v[1])),
            Some(_) => {
                errs.push(format!("[sweep] {key} must have exactly two entries"));
                None
            }
            None => {
                errs.push(format!("[sweep] missing required key `{key}`"));
                None
            }
        }
    };
    let wt = pair(&mut r, "window_t", errs);
    let wx = pair(&mut r, "window_x", errs);
    let window_samples = r.opt_usize("window_samples", errs).unwrap_or(10);
    let p = r
        .opt_f64_list("p", errs)
        .unwrap_or_else(|| vec![1.0, 2.0, 3.0]);
    for &q in &p {
        if q >= 4.0 {
            errs.push(format!(
                "[sweep] p = {q} is rejected: strong convergence holds only for 1 <= p < 4"
            ));
        } else if q < 1.0 {
            errs.push(format!("[sweep] p = {q} is below 1"));
        }
    }
    let refinement = r.opt_usize("refinement", errs).unwrap_or(8);
    let reference = match r.opt_str("reference", errs).unwrap_or("godunov_fine") {
        "godunov_fine" => Some(Reference::GodunovFine { factor: refinement }),
        "riemann_exact" => Some(Reference::RiemannExact),
        "self" => Some(Reference::SelfComparison),
        other => {
            errs.push(format!(
                "[sweep] reference must be \"godunov_fine\", \"riemann_exact\" or \"self\", got \"{other}\""
            ));
            None
        }
    };
    r.finish(errs);
    let (wt, wx) = (wt?, wx?);
    Some(SweepSection {
        eps: eps?,
        coupling_c,
        coupling: coupling?,
        window: Window {
            t_start: wt.0,
            t_end: wt.1,
            x_start: wx.0,
            x_end: wx.1,
        },
        window_samples,
        p,
        reference: reference?,
    })
}

fn parse_entropy(t: &Table, errs: &mut Vec<String>) -> Option<EntropySection> {
    let mut r = Reader::new("entropy", t);
    let tolerance = r.opt_f64("tolerance", errs);
    let time_samples = r.opt_usize("time_samples", errs).unwrap_or(40);
    if time_samples < 2 {
        errs.push("[entropy] time_samples must be at least 2".into());
    }
    let mut pairs = Vec::new();
    if let Some(v) = r.raw("pairs") {
        match v {
            Value::Array(items) => {
                for item in items {
                    let Value::Table(pt) = item else {
                        errs.push("[entropy] pairs entries must be tables".into());
                        continue;
                    };
                    let mut pr = Reader::new("entropy.pairs", pt);
                    let kind = pr.opt_str("kind", errs);
                    let parsed = match kind {
                        Some("square") => Some(EntropyKind::Square),
                        Some("kruzhkov_smoothed") => {
                            let k = pr.f64("k", errs);
                            let delta = pr.f64("delta", errs);
                            k.zip(delta)
                                .map(|(k, delta)| EntropyKind::KruzhkovSmoothed { k, delta })
                        }
                        Some("compact_bump") => {
                            let center = pr.f64("center", errs);
                            let radius = pr.f64("radius", errs);
                            center
                                .zip(radius)
                                .map(|(center, radius)| EntropyKind::CompactBump { center, radius })
                        }
                        other => {
                            errs.push(format!("[entropy.pairs] unknown kind {other:?}"));
                            None
                        }
                    };
                    pr.finish(errs);
                    pairs.extend(parsed);
                }
            }
            _ => errs.push("[entropy] pairs must be an array of tables".into()),
        }
    }
    let mut test_functions = Vec::new();
    if let Some(v) = r.raw("test_functions") {
        match v {
            Value::Array(items) => {
                for item in items {
                    let Value::Table(pt) = item else {
                        errs.push("[entropy] test_functions entries must be tables".into());
                        continue;
                    };
                    let mut pr = Reader::new("entropy.test_functions", pt);
                    let vals = [
                        pr.f64("t_center", errs),
                        pr.f64("t_radius", errs),
                        pr.f64("x_center", errs),
                        pr.f64("x_radius", errs),
                    ];
                    pr.finish(errs);
                    if let [Some(tc), Some(tr), Some(xc), Some(xr)] = vals {
                        if tr > 0.0 && xr > 0.0 {
                            test_functions.push(TestFunction::new(tc, tr, xc, xr));
                        } else {
                            errs.push("[entropy.test_functions] radii must be positive".into());
                        }
                    }
                }
            }
            _ => errs.push("[entropy] test_functions must be an array of tables".into()),
        }
    }
    r.finish(errs);
    Some(EntropySection {
        pairs,
        test_functions,
        tolerance,
        time_samples,
    })
}

impl RunConfig {
    /// Parses a document.
    pub fn parse_str(source: &str) -> Result<Self, ConfigErrors> {
        let root: Table = source
            .parse()
            .map_err(|e: toml::de::Error| ConfigErrors(vec![format!("syntax: {e}")]))?;
        let mut errs = Vec::new();
        match root.get("version") {
            Some(Value::Integer(SCHEMA_VERSION)) => {}
            Some(v) => errs.push(format!(
                "unsupported schema version {v}; this build reads version = {SCHEMA_VERSION}"
            )),
            None => errs.push(format!("missing `version = {SCHEMA_VERSION}`")),
        }
        const KNOWN: [&str; 7] = [
            "version", "grid", "params", "datum", "solver", "sweep", "entropy",
        ];
        for key in root.keys() {
            if !KNOWN.contains(&key.as_str()) {
                errs.push(format!("unknown top-level key `{key}`"));
            }
        }
        let grid = section(&root, "grid", &mut errs).and_then(|t| parse_grid(t, &mut errs));
        let params = section(&root, "params", &mut errs).and_then(|t| parse_params(t, &mut errs));
        let datum = section(&root, "datum", &mut errs).and_then(|t| parse_datum(t, &mut errs));
        let solver = section(&root, "solver", &mut errs).and_then(|t| parse_solver(t, &mut errs));
        let sweep = section(&root, "sweep", &mut errs).and_then(|t| parse_sweep(t, &mut errs));
        let entropy =
            section(&root, "entropy", &mut errs).and_then(|t| parse_entropy(t, &mut errs));
        if errs.is_empty() {
            Ok(Self {
                grid,
                params,
                datum,
                solver,
                sweep,
                entropy,
                source: source.to_string(),
            })
        } else {
            Err(ConfigErrors(errs))
        }
    }

    /// Reads and parses a file.
    pub fn parse_file(path: &Path) -> Result<Self, ConfigErrors> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigErrors(vec![format!("cannot read {}: {e}", path.display())]))?;
        Self::parse_str(&text)
    }

    fn need<'a, T>(v: &'a Option<T>, name: &str, errs: &mut Vec<String>) -> Option<&'a T> {
        if v.is_none() {
            errs.push(format!("section [{name}] is required for this subcommand"));
        }
        v.as_ref()
    }

    fn require<'a, T>(v: &'a Option<T>, name: &str) -> Result<&'a T, ConfigErrors> {
        v.as_ref().ok_or_else(|| {
            ConfigErrors(vec![format!(
                "section [{name}] is required for this subcommand"
            )])
        })
    }

    /// The grid.
    pub fn grid(&self) -> Result<Grid, ConfigErrors> {
        let g = Self::require(&self.grid, "grid")?;
        Grid::new(g.half_length, g.n_points).map_err(|e| ConfigErrors(vec![e.to_string()]))
    }

    /// KS coefficients for a single run.
    pub fn ks_params(&self) -> Result<KsParams, ConfigErrors> {
        let p = Self::require(&self.params, "params")?;
        let eps = p.eps.ok_or_else(|| {
            ConfigErrors(vec!["[params] `eps` is required for this subcommand".into()])
        })?;
        let beta = match p.beta {
            Some(b) => b,
            None if eps == 0.0 => 0.0,
            None => {
                let c = self.sweep.as_ref().map_or(1.0, |s| s.coupling_c);
                coupling_beta(eps, c).map_err(|e| ConfigErrors(vec![e.to_string()]))?
            }
        };
        let (b, c) = match (p.b, p.c) {
            (Some(b), Some(c)) => (b, c),
            _ => energy_preserving_coefficients(p.a),
        };
        KsParams::new(p.a, b, c, p.d, beta, eps).map_err(|e| ConfigErrors(vec![e.to_string()]))
    }

    /// Transport coefficient `A`.
    pub fn a_coeff(&self) -> Result<f64, ConfigErrors> {
        Self::require(&self.params, "params").map(|p| p.a)
    }

    /// Initial datum; `auto` width resolves to `max(ε, 2h)`.
    pub fn initial_datum(&self, eps: f64, grid: &Grid) -> Result<InitialDatum, ConfigErrors> {
        let d = Self::require(&self.datum, "datum")?;
        let width = match d.mollification_width {
            Width::Auto => default_mollification_width(eps, grid),
            Width::Fixed(w) => w,
        };
        Ok(InitialDatum::new(d.kind.clone(), width))
    }

    /// Solver settings for `simulate` and `burgers`.
    pub fn solver_config(&self) -> Result<SolverConfig, ConfigErrors> {
        let s = Self::require(&self.solver, "solver")?;
        let t_final = s
            .t_final
            .ok_or_else(|| ConfigErrors(vec!["[solver] `t_final` is required".into()]))?;
        let times = match (&s.snapshot_times, s.snapshot_interval) {
            (Some(t), _) => t.clone(),
            (None, Some(dt)) => {
                let n = (t_final / dt).round().max(1.0) as usize;
                (0..=n).map(|i| (i as f64 * dt).min(t_final)).collect()
            }
            (None, None) => vec![0.0, t_final],
        };
        let mut cfg =
            SolverConfig::new(t_final, times).map_err(|e| ConfigErrors(vec![e.to_string()]))?;
        cfg.cfl_advective = s.cfl_advective;
        cfg.cfl_dispersive = s.cfl_dispersive;
        cfg.dealias_fraction = s.dealias_fraction;
        cfg.allow_nonconservative = s.allow_nonconservative;
        if let Some(m) = s.max_steps {
            cfg.max_steps = m;
        }
        cfg.validate()
            .map_err(|e| ConfigErrors(vec![e.to_string()]))?;
        Ok(cfg)
    }

    /// Sweep description for `limit`.
    pub fn sweep_config(
        &self,
        coupling_override: Option<f64>,
    ) -> Result<SweepConfig, ConfigErrors> {
        let mut errs = Vec::new();
        let grid = self.grid();
        let sweep = Self::need(&self.sweep, "sweep", &mut errs);
        let datum = Self::need(&self.datum, "datum", &mut errs);
        let params = Self::need(&self.params, "params", &mut errs);
        if let Err(e) = &grid {
            errs.extend(e.0.iter().cloned());
        }
        let (Ok(grid), Some(sweep), Some(datum), Some(params)) = (grid, sweep, datum, params)
        else {
            return Err(ConfigErrors(errs));
        };
        let solver = self.solver.clone().unwrap_or_default();
        let cfg = SweepConfig {
            eps_sequence: sweep.eps.clone(),
            coupling_c: coupling_override.unwrap_or(sweep.coupling_c),
            coupling: sweep.coupling,
            datum: datum.kind.clone(),
            mollification: match datum.mollification_width {
                Width::Auto => Mollification::Auto,
                Width::Fixed(w) => Mollification::Fixed(w),
            },
            a_coeff: params.a,
            grid,
            window: sweep.window,
            window_samples: sweep.window_samples,
            p_exponents: sweep.p.clone(),
            reference: sweep.reference,
            cfl_advective: solver.cfl_advective,
            cfl_dispersive: solver.cfl_dispersive,
        };
        cfg.validate()
            .map_err(|e| ConfigErrors(vec![format!("[sweep] {e}")]))?;
        Ok(cfg)
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Writes a standalone `simulate` configuration for one run.
pub fn render_run_config(
    grid: &Grid,
    p: &KsParams,
    datum: &InitialDatum,
    solver: &SolverConfig,
) -> String {
    let mut s = String::new();
    s.push_str(&format!("version = {SCHEMA_VERSION}\n\n[grid]\n"));
    s.push_str(&format!(
        "half_length = {}\nn_points = {}\n\n",
        fmt_f64(grid.half_length()),
        grid.n_points()
    ));
    s.push_str(&format!(
        "[params]\na = {}\nb = {}\nc = {}\nd = {}\neps = {}\nbeta = {}\n\n",
        fmt_f64(p.a_coeff),
        fmt_f64(p.b_coeff),
        fmt_f64(p.c_coeff),
        fmt_f64(p.d_coeff),
        fmt_f64(p.eps),
        fmt_f64(p.beta)
    ));
    s.push_str("[datum]\n");
    match &datum.kind {
        DatumKind::RiemannStep {
            u_left,
            u_right,
            position,
            extent,
            transition_width,
        } => s.push_str(&format!(
            "kind = \"riemann_step\"\nu_left = {}\nu_right = {}\nposition = {}\nextent = {}\ntransition_width = {}\n",
            fmt_f64(*u_left),
            fmt_f64(*u_right),
            fmt_f64(*position),
            fmt_f64(*extent),
            fmt_f64(*transition_width)
        )),
        DatumKind::Gaussian {
            amplitude,
            center,
            width,
        } => s.push_str(&format!(
            "kind = \"gaussian\"\namplitude = {}\ncenter = {}\nwidth = {}\n",
            fmt_f64(*amplitude),
            fmt_f64(*center),
            fmt_f64(*width)
        )),
        DatumKind::Custom { .. } => s.push_str("# custom datum (not representable)\n"),
    }
    s.push_str(&format!(
        "mollification_width = {}\n\n",
        fmt_f64(datum.mollification_width)
    ));
    let times: Vec<String> = solver.snapshot_times.iter().map(|t| fmt_f64(*t)).collect();
    s.push_str(&format!(
        "[solver]\nt_final = {}\nsnapshot_times = [{}]\ncfl_advective = {}\ncfl_dispersive = {}\ndealias_fraction = {}\nallow_nonconservative = {}\n",
        fmt_f64(solver.t_final),
        times.join(", "),
        fmt_f64(solver.cfl_advective),
        fmt_f64(solver.cfl_dispersive),
        fmt_f64(solver.dealias_fraction),
        solver.allow_nonconservative
    ));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
version = 1
[grid]
half_length = 10.0
n_points = 256
[params]
a = 1.0
eps = 0.05
[datum]
kind = "gaussian"
amplitude = 1.0
width = 1.0
[solver]
t_final = 1.0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse_str(MINIMAL).unwrap();
        let s = cfg.solver_config().unwrap();
        assert_eq!(s.cfl_advective, 0.5);
        assert_eq!(s.dealias_fraction, 2.0 / 3.0);
        let p = cfg.ks_params().unwrap();
        assert_eq!(p.beta, coupling_beta(0.05, 1.0).unwrap());
        assert!(p.energy_preserving_flag());
        let g = cfg.grid().unwrap();
        let d = cfg.initial_datum(p.eps, &g).unwrap();
        assert_eq!(d.mollification_width, 0.05f64.max(2.0 * g.spacing()));
    }

    #[test]
    fn p_four_is_rejected() {
        let text = format!(
            "{MINIMAL}\n[sweep]\neps = [0.1, 0.05]\nwindow_t = [0.5, 1.0]\nwindow_x = [-2.0, 2.0]\np = [1, 4]\n"
        );
        let err = RunConfig::parse_str(&text).unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|e| e.contains("p = 4") && e.contains("p < 4")));
    }

    #[test]
    fn eps_zero_with_beta_is_rejected() {
        let text = MINIMAL.replace("eps = 0.05", "eps = 0.0\nbeta = 1e-4");
        let err = RunConfig::parse_str(&text).unwrap_err();
        assert!(err.0.iter().any(|e| e.contains("eps = 0")));
    }

    #[test]
    fn all_errors_are_collected() {
        let text = MINIMAL
            .replace("version = 1", "version = 2")
            .replace("n_points = 256", "n_points = 100\nbogus = 3")
            .replace("kind = \"gaussian\"", "kind = \"triangle\"");
        let err = RunConfig::parse_str(&text).unwrap_err();
        assert!(err.0.len() >= 4, "{err}");
    }

    #[test]
    fn rendered_config_round_trips() {
        let cfg = RunConfig::parse_str(MINIMAL).unwrap();
        let (g, p, s) = (
            cfg.grid().unwrap(),
            cfg.ks_params().unwrap(),
            cfg.solver_config().unwrap(),
        );
        let d = cfg.initial_datum(p.eps, &g).unwrap();
        let again = RunConfig::parse_str(&render_run_config(&g, &p, &d, &s)).unwrap();
        assert_eq!(again.ks_params().unwrap(), p);
        assert_eq!(again.grid().unwrap(), g);
        assert_eq!(again.solver_config().unwrap(), s);
    }
}
