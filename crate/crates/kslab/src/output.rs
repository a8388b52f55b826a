//! Run directories: writing them after a simulation and reading them back.
//!
//! Layout of a run directory:
//!
//! ```text
//! config.toml            standalone config that reproduces the run
//! snapshots.csv          index, t, file, log_index
//! snapshots/snapshot_NNNN.csv
//! invariants.csv         t, mass, E, dissipation_integral, linf
//! step_log.csv           every accepted step (KS runs only)
//! summary.txt
//! ```
//!
//! Numbers are written as `{:.16e}`: 17 significant digits, which parse
//! back to the identical `f64`.

use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use kslab_core::estimates::field_record;
use kslab_core::grid::{Field, Grid};
use kslab_core::solver::{Diagnostic, Snapshot, StepRecord, Trajectory};

use crate::config::{ConfigErrors, RunConfig};

/// Failure to write or read a run directory.
#[derive(Debug)]
pub enum OutputError {
    Io(PathBuf, io::Error),
    Csv(PathBuf, csv::Error),
    Format(PathBuf, String),
    Config(ConfigErrors),
}

impl fmt::Display for OutputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Io(p, e) => write!(f, "{}: {e}", p.display()),
            Self::Csv(p, e) => write!(f, "{}: {e}", p.display()),
            Self::Format(p, e) => write!(f, "{}: {e}", p.display()),
            Self::Config(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for OutputError {}

pub type OutputResult<T> = std::result::Result<T, OutputError>;

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |e| OutputError::Io(path.to_path_buf(), e)
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |e| OutputError::Csv(path.to_path_buf(), e)
}

/// Writes rows of numbers under a header.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> OutputResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(row.iter().map(|v| fmt_num(*v)))
            .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

/// Reads a numeric table; returns the header and the rows.
pub fn read_table(path: &Path) -> OutputResult<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = r
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| OutputError::Format(path.to_path_buf(), format!("`{s}`: {e}")))
            })
            .collect::<OutputResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// `x,u` per node.
pub fn write_field_csv(path: &Path, f: &Field) -> OutputResult<()> {
    let rows: Vec<Vec<f64>> = f
        .grid()
        .nodes()
        .zip(f.values())
        .map(|(x, &u)| vec![x, u])
        .collect();
    write_table(path, &["x", "u"], &rows)
}

/// Inverse of [`write_field_csv`]; the node positions must match `grid`.
pub fn read_field_csv(path: &Path, grid: &Grid) -> OutputResult<Field> {
    let (header, rows) = read_table(path)?;
    if header != ["x", "u"] {
        return Err(OutputError::Format(
            path.into(),
            format!("unexpected header {header:?}"),
        ));
    }
    if rows.len() != grid.n_points() {
        return Err(OutputError::Format(
            path.into(),
            format!(
                "{} rows for a grid of {} points",
                rows.len(),
                grid.n_points()
            ),
        ));
    }
    let tol = 1e-9 * grid.spacing();
    let mut values = Vec::with_capacity(rows.len());
    for (row, x) in rows.iter().zip(grid.nodes()) {
        if row.len() != 2 || (row[0] - x).abs() > tol {
            return Err(OutputError::Format(
                path.into(),
                format!("node mismatch near x = {x}"),
            ));
        }
        values.push(row[1]);
    }
    Field::new(*grid, values).map_err(|e| OutputError::Format(path.into(), e.to_string()))
}

pub const STEP_LOG_HEADER: [&str; 15] = [
    "t",
    "dt",
    "mass",
    "energy",
    "l2_sq",
    "grad_l2_sq",
    "hess_l2_sq",
    "l4_pow4",
    "linf",
    "dissipation_eps",
    "dissipation_beta_eps",
    "ux_uxx_l1",
    "u_uxx_l2_sq",
    "u_ux_uxx_l1",
    "u_ux_l2_sq",
];

fn record_row(r: &StepRecord) -> Vec<f64> {
    vec![
        r.t,
        r.dt,
        r.mass,
        r.energy,
        r.l2_sq,
        r.grad_l2_sq,
        r.hess_l2_sq,
        r.l4_pow4,
        r.linf,
        r.dissipation_eps,
        r.dissipation_beta_eps,
        r.ux_uxx_l1,
        r.u_uxx_l2_sq,
        r.u_ux_uxx_l1,
        r.u_ux_l2_sq,
    ]
}

fn row_record(v: &[f64]) -> StepRecord {
    StepRecord {
        t: v[0],
        dt: v[1],
        mass: v[2],
        energy: v[3],
        l2_sq: v[4],
        grad_l2_sq: v[5],
        hess_l2_sq: v[6],
        l4_pow4: v[7],
        linf: v[8],
        dissipation_eps: v[9],
        dissipation_beta_eps: v[10],
        ux_uxx_l1: v[11],
        u_uxx_l2_sq: v[12],
        u_ux_uxx_l1: v[13],
        u_ux_l2_sq: v[14],
    }
}

/// Invariants at each snapshot: the logged record when there is one,
/// otherwise recomputed from the field (dissipation left at zero).
pub fn invariant_rows(traj: &Trajectory) -> Vec<Vec<f64>> {
    traj.snapshots
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let r = traj
                .record_for(i)
                .copied()
                .unwrap_or_else(|| field_record(&s.field, &traj.params, s.time));
            vec![s.time, r.mass, r.energy, r.dissipation(), r.linf]
        })
        .collect()
}

fn snapshot_file(i: usize) -> String {
    format!("snapshot_{i:04}.csv")
}

/// Writes the run directory; `config_text` is stored as `config.toml`.
/// `extra_summary` is appended to the summary.
pub fn write_run_dir(
    dir: &Path,
    traj: &Trajectory,
    config_text: &str,
    failure: Option<&str>,
    extra_summary: &str,
) -> OutputResult<()> {
    let snaps = dir.join("snapshots");
    fs::create_dir_all(&snaps).map_err(io_err(&snaps))?;
    let cfg_path = dir.join("config.toml");
    fs::write(&cfg_path, config_text).map_err(io_err(&cfg_path))?;

    let index_path = dir.join("snapshots.csv");
    let mut w = csv::Writer::from_path(&index_path).map_err(csv_err(&index_path))?;
    w.write_record(["index", "t", "file", "log_index"])
        .map_err(csv_err(&index_path))?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        let name = snapshot_file(i);
        write_field_csv(&snaps.join(&name), &s.field)?;
        let log = s.log_index.map_or(String::new(), |k| k.to_string());
        w.write_record([
            i.to_string(),
            fmt_num(s.time),
            format!("snapshots/{name}"),
            log,
        ])
        .map_err(csv_err(&index_path))?;
    }
    w.flush().map_err(io_err(&index_path))?;

    write_table(
        &dir.join("invariants.csv"),
        &["t", "mass", "E", "dissipation_integral", "linf"],
        &invariant_rows(traj),
    )?;
    if !traj.log.is_empty() {
        let rows: Vec<Vec<f64>> = traj.log.iter().map(record_row).collect();
        write_table(&dir.join("step_log.csv"), &STEP_LOG_HEADER, &rows)?;
    }

    let p = &traj.params;
    let mut s = String::new();
    s.push_str(&format!(
        "grid: L = {}, N = {}, h = {:e}\n",
        traj.grid.half_length(),
        traj.grid.n_points(),
        traj.grid.spacing()
    ));
    s.push_str(&format!(
        "params: A = {}, B = {}, C = {}, D = {}, eps = {:e}, beta = {:e}, energy preserving = {}\n",
        p.a_coeff,
        p.b_coeff,
        p.c_coeff,
        p.d_coeff,
        p.eps,
        p.beta,
        p.energy_preserving_flag()
    ));
    s.push_str(&format!(
        "snapshots: {}, steps: {}\n",
        traj.snapshots.len(),
        traj.step_count
    ));
    if let Some(t) = traj.last().map(|s| s.time) {
        s.push_str(&format!("final time reached: {t}\n"));
    }
    if let (Some(a), Some(b)) = (traj.log.first(), traj.log.last()) {
        s.push_str(&format!(
            "mass drift: {:e}\nenergy defect E(T) + D(T) - E(0): {:e}\n",
            b.mass - a.mass,
            b.energy + b.dissipation() - a.energy
        ));
    }
    for d in &traj.diagnostics {
        match d {
            Diagnostic::SupportNearBoundary {
                time,
                max_abs_in_band,
            } => s.push_str(&format!(
                "diagnostic: solution reaches the outer 10% of the domain at t = {time} (max |u| there {max_abs_in_band:e})\n"
            )),
            Diagnostic::CflReduced { requested, used } => s.push_str(&format!(
                "diagnostic: CFL number lowered from {requested} to {used}\n"
            )),
        }
    }
    match failure {
        Some(f) => s.push_str(&format!("status: FAILED ({f})\n")),
        None => s.push_str("status: completed\n"),
    }
    s.push_str(extra_summary);
    let sum_path = dir.join("summary.txt");
    fs::write(&sum_path, s).map_err(io_err(&sum_path))
}

/// A run directory read back from disk.
#[derive(Debug, Clone)]
pub struct LoadedRun {
    pub config: RunConfig,
    pub trajectory: Trajectory,
}

/// Reads a directory produced by [`write_run_dir`]. Diagnostics are not
/// restored.
pub fn read_run_dir(dir: &Path) -> OutputResult<LoadedRun> {
    let config = RunConfig::parse_file(&dir.join("config.toml")).map_err(OutputError::Config)?;
    let grid = config.grid().map_err(OutputError::Config)?;
    let params = config.ks_params().map_err(OutputError::Config)?;

    let log_path = dir.join("step_log.csv");
    let log: Vec<StepRecord> = if log_path.exists() {
        let (header, rows) = read_table(&log_path)?;
        if header != STEP_LOG_HEADER {
            return Err(OutputError::Format(log_path, "unexpected header".into()));
        }
        if rows.iter().any(|r| r.len() != STEP_LOG_HEADER.len()) {
            return Err(OutputError::Format(log_path, "short row".into()));
        }
        rows.iter().map(|r| row_record(r)).collect()
    } else {
        Vec::new()
    };

    let index_path = dir.join("snapshots.csv");
    let mut r = csv::Reader::from_path(&index_path).map_err(csv_err(&index_path))?;
    let mut snapshots = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err(&index_path))?;
        let bad = |m: &str| OutputError::Format(index_path.clone(), m.to_string());
        let time: f64 = rec
            .get(1)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad time"))?;
        let file = rec.get(2).ok_or_else(|| bad("missing file"))?;
        let log_index = match rec.get(3) {
            Some("") | None => None,
            Some(s) => Some(s.parse::<usize>().map_err(|_| bad("bad log_index"))?),
        };
        if log_index.is_some_and(|k| k >= log.len()) {
            return Err(bad("log_index out of range"));
        }
        let field = read_field_csv(&dir.join(file), &grid)?;
        snapshots.push(Snapshot {
            time,
            field,
            log_index,
        });
    }
    let accepted_dt_history: Vec<f64> = log.iter().skip(1).map(|r| r.dt).collect();
    let trajectory = Trajectory {
        params,
        grid,
        snapshots,
        step_count: accepted_dt_history.len(),
        accepted_dt_history,
        log,
        diagnostics: Vec::new(),
    };
    Ok(LoadedRun { config, trajectory })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip_exactly() {
        for v in [
            0.1,
            1.0 / 3.0,
            -2.5e-300,
            6.02e23,
            f64::MIN_POSITIVE,
            0.0,
            -0.0,
        ] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn field_csv_round_trips() {
        let tmp = tempfile::tempdir().unwrap();
        let dir = tmp.path();
        let grid = Grid::new(3.0, 32).unwrap();
        let f = Field::from_fn(grid, |x| (x * 1.3).sin() / 7.0);
        let path = dir.join("f.csv");
        write_field_csv(&path, &f).unwrap();
        assert_eq!(read_field_csv(&path, &grid).unwrap(), f);
        let other = Grid::new(3.0, 64).unwrap();
        assert!(read_field_csv(&path, &other).is_err());
    }
}
