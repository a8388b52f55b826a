//! Argument parsing and the five subcommands.
//!
//! Exit codes: 0 success, 1 a report contains FAIL (or a run failed),
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use kslab_core::burgers::{
    burgers_solve, entropy_residual, make_entropy_pair, weak_form_residual, EntropyKind,
    TestFunction,
};
use kslab_core::datum::{mollify, DatumKind};
use kslab_core::estimates::{estimate_report, EstimateReport, RATE_NAMES};
use kslab_core::limit::{empirical_order, ConvergenceTable, SweepConfig};
use kslab_core::params::{
    appendix_roots, energy_preserving_coefficients, two_roots_certificate,
    verify_constraint_system, AppendixProblem, KsParams,
};
use kslab_core::solver::simulate;

use crate::config::{render_run_config, ConfigErrors, RunConfig};
use crate::output::{fmt_num, read_run_dir, write_run_dir, write_table, OutputError};
use crate::sweep::run_parallel;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Crate version plus the configuration schema it reads.
pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (config schema 1)");

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "KSLAB_OUT";

#[derive(Debug, Parser)]
#[command(name = "kslab", version = VERSION, about = "Numerical lab for the KS-type equation and its Burgers limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one KS run and write a run directory.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Godunov solution of the inviscid limit plus weak and entropy residuals.
    Burgers {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the a priori estimates on a simulate run directory.
    CheckEstimates {
        #[arg(long)]
        run: PathBuf,
    },
    /// Sweep eps towards zero and measure convergence to the limit.
    Limit {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides [sweep] coupling_c.
        #[arg(long)]
        coupling_c: Option<f64>,
    },
    /// Coefficient algebra: energy-preserving (B, C) for A, and the
    /// two-root family for (n, alpha).
    Params {
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Also write the values as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

/// A subcommand failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn fail(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAIL,
            message: message.into(),
        }
    }
}

impl From<ConfigErrors> for Failure {
    fn from(e: ConfigErrors) -> Self {
        Self::usage(e.to_string())
    }
}

impl From<OutputError> for Failure {
    fn from(e: OutputError) -> Self {
        match e {
            OutputError::Config(c) => c.into(),
            other => Self::usage(other.to_string()),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `argv` (program name first) and runs the subcommand.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Simulate { config, out } => cmd_simulate(&config, out),
        Command::Burgers { config, out } => cmd_burgers(&config, out),
        Command::CheckEstimates { run } => cmd_check_estimates(&run),
        Command::Limit {
            config,
            out,
            jobs,
            coupling_c,
        } => cmd_limit(&config, out, jobs, coupling_c),
        Command::Params { a, n, alpha, csv } => cmd_params(a, n, alpha, csv),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("kslab: {}", f.message.trim_end());
            f.code
        }
    }
}

fn out_dir(explicit: Option<PathBuf>, sub: &str) -> PathBuf {
    explicit.unwrap_or_else(|| {
        std::env::var_os(OUT_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from("kslab-out"))
            .join(sub)
    })
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn cmd_simulate(config: &Path, out: Option<PathBuf>) -> CmdResult {
    let cfg = RunConfig::parse_file(config)?;
    let grid = cfg.grid()?;
    let params = cfg.ks_params()?;
    let datum = cfg.initial_datum(params.eps, &grid)?;
    let solver = cfg.solver_config()?;
    let dir = out_dir(out, "simulate");
    let text = render_run_config(&grid, &params, &datum, &solver);
    match simulate(&datum, &params, &solver, &grid) {
        Ok(traj) => {
            write_run_dir(&dir, &traj, &text, None, "")?;
            println!(
                "simulate: {} snapshots written to {}",
                traj.snapshots.len(),
                dir.display()
            );
            Ok(EXIT_OK)
        }
        Err(fail) if fail.partial.snapshots.is_empty() => Err(Failure::usage(format!(
            "cannot start the run: {}",
            fail.error
        ))),
        Err(fail) => {
            let msg = fail.error.to_string();
            write_run_dir(&dir, &fail.partial, &text, Some(&msg), "")?;
            Err(Failure::fail(format!(
                "run stopped early ({msg}); partial output in {}",
                dir.display()
            )))
        }
    }
}

/// Range of the unmollified datum, used to place the default entropies.
fn datum_range(kind: &DatumKind) -> (f64, f64) {
    match *kind {
        DatumKind::RiemannStep {
            u_left, u_right, ..
        } => (u_left.min(u_right).min(0.0), u_left.max(u_right).max(0.0)),
        DatumKind::Gaussian { amplitude, .. } => (amplitude.min(0.0), amplitude.max(0.0)),
        DatumKind::Custom { .. } => (-1.0, 1.0),
    }
}

fn datum_center(kind: &DatumKind) -> f64 {
    match *kind {
        DatumKind::RiemannStep { position, .. } => position,
        DatumKind::Gaussian { center, .. } => center,
        DatumKind::Custom { support, .. } => 0.5 * (support.0 + support.1),
    }
}

/// Whether `η` is convex, so that entropy solutions have `R(φ) ≤ 0`.
pub fn is_convex(kind: EntropyKind) -> bool {
    !matches!(kind, EntropyKind::CompactBump { .. })
}

fn default_pairs(range: (f64, f64)) -> Vec<EntropyKind> {
    let mid = 0.5 * (range.0 + range.1);
    let half = 0.5 * (range.1 - range.0);
    vec![
        EntropyKind::Square,
        EntropyKind::KruzhkovSmoothed {
            k: mid,
            delta: 0.01,
        },
        EntropyKind::CompactBump {
            center: mid,
            radius: half + 0.1,
        },
    ]
}

fn default_test_functions(t_final: f64, center: f64, half_length: f64) -> Vec<TestFunction> {
    let l = half_length;
    [
        (0.5, 0.3, 0.0, 0.1),
        (0.6, 0.35, 0.05, 0.2),
        (0.4, 0.25, 0.03, 0.05),
        (0.7, 0.25, 0.05, 0.1),
        (0.5, 0.45, 0.0, 0.3),
    ]
    .iter()
    .map(|&(tc, tr, xc, xr)| TestFunction::new(tc * t_final, tr * t_final, center + xc * l, xr * l))
    .collect()
}

fn cmd_burgers(config: &Path, out: Option<PathBuf>) -> CmdResult {
    let cfg = RunConfig::parse_file(config)?;
    let grid = cfg.grid()?;
    let a = cfg.a_coeff()?;
    let eps = cfg.params.and_then(|p| p.eps).unwrap_or(0.0);
    let datum = cfg.initial_datum(eps, &grid)?;
    let solver = cfg.solver_config()?;
    let entropy = cfg.entropy.clone();
    let samples = entropy.as_ref().map_or(40, |e| e.time_samples);
    let t_final = solver.t_final;
    let mut times = solver.output_times();
    times.extend((0..=samples).map(|i| t_final * i as f64 / samples as f64));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let traj = burgers_solve(&datum, a, &grid, t_final, &times)
        .map_err(|e| Failure::usage(format!("cannot start the run: {e}")))?;
    let u0 = mollify(&datum, &grid).map_err(|e| Failure::usage(e.to_string()))?;

    let h = grid.spacing();
    let tol = entropy
        .as_ref()
        .and_then(|e| e.tolerance)
        .unwrap_or(1e-8 + 10.0 * h);
    let kinds = match &entropy {
        Some(e) if !e.pairs.is_empty() => e.pairs.clone(),
        _ => default_pairs(datum_range(&datum.kind)),
    };
    let phis = match &entropy {
        Some(e) if !e.test_functions.is_empty() => e.test_functions.clone(),
        _ => default_test_functions(t_final, datum_center(&datum.kind), grid.half_length()),
    };
    let pairs = kinds
        .iter()
        .map(|&k| make_entropy_pair(k, a))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::usage(format!("[entropy] {e}")))?;

    let dir = out_dir(out, "burgers");
    let mut summary = String::new();
    let _ = writeln!(summary, "entropy tolerance: {tol:e}");
    let _ = writeln!(
        summary,
        "compact_bump entropies are not convex; their residual is reported but not judged"
    );
    let mut all_ok = true;
    let report = dir.join("entropy_report.csv");
    create_dir(&dir)?;
    let mut w = csv::Writer::from_path(&report).map_err(|e| Failure::usage(e.to_string()))?;
    let csv_fail = |e: csv::Error| Failure::usage(format!("{}: {e}", report.display()));
    w.write_record([
        "phi_id",
        "pair_kind",
        "weak_residual",
        "entropy_residual",
        "verdict",
    ])
    .map_err(csv_fail)?;
    for (i, phi) in phis.iter().enumerate() {
        let weak = weak_form_residual(&traj, a, &u0, phi)
            .map_err(|e| Failure::usage(format!("test function {i}: {e}")))?;
        for pair in &pairs {
            let r = entropy_residual(&traj, pair, phi)
                .map_err(|e| Failure::usage(format!("test function {i}: {e}")))?;
            // the sign of R is only prescribed for convex entropies
            let ok = weak.abs() <= tol && (!is_convex(pair.kind()) || r <= tol);
            all_ok &= ok;
            w.write_record([
                i.to_string(),
                pair.kind().label().to_string(),
                fmt_num(weak),
                fmt_num(r),
                verdict(ok).to_string(),
            ])
            .map_err(csv_fail)?;
        }
    }
    w.flush()
        .map_err(|e| Failure::usage(format!("{}: {e}", report.display())))?;
    let _ = writeln!(summary, "entropy report: {}", verdict(all_ok));
    write_run_dir(&dir, &traj, &cfg.source, None, &summary)?;
    println!("burgers: {} written to {}", verdict(all_ok), dir.display());
    Ok(if all_ok { EXIT_OK } else { EXIT_FAIL })
}

/// Relative energy-identity tolerance for dissipative runs.
pub const ENERGY_IDENTITY_TOL: f64 = 1e-5;
/// Relative energy-conservation tolerance at `ε = 0`.
pub const ENERGY_CONSERVATION_TOL: f64 = 1e-8;

/// One line of the estimates summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateVerdict {
    pub name: &'static str,
    pub detail: String,
    /// `None` when the check does not apply.
    pub pass: Option<bool>,
}

/// PASS/FAIL lines for a report.
pub fn estimate_verdicts(report: &EstimateReport) -> Vec<EstimateVerdict> {
    let mut out = Vec::new();
    let e0 = report
        .snapshots
        .first()
        .map_or(0.0, |s| s.energy)
        .max(f64::MIN_POSITIVE);
    match &report.budget {
        Some(rows) => {
            let worst = rows.iter().map(|r| r.defect.abs()).fold(0.0, f64::max) / e0;
            let (what, tol) = if report.eps == 0.0 {
                ("energy conservation", ENERGY_CONSERVATION_TOL)
            } else {
                ("energy identity", ENERGY_IDENTITY_TOL)
            };
            let growth = report.max_energy_increase() <= tol * e0;
            out.push(EstimateVerdict {
                name: "l-2",
                detail: format!(
                    "{what}: max |E(0) - E(t) - D(t)| / E(0) = {worst:.3e} (tol {tol:e}), energy non-increasing: {growth}"
                ),
                pass: Some(worst <= tol && growth),
            });
        }
        None => out.push(EstimateVerdict {
            name: "l-2",
            detail: "not checked: coefficients are not energy preserving".into(),
            pass: None,
        }),
    }
    let failed = report.linf_checks.iter().filter(|c| !c.ok).count();
    let scaled = report
        .linf_checks
        .iter()
        .map(|c| c.scaled_linf)
        .fold(0.0, f64::max);
    out.push(EstimateVerdict {
        name: "u-l-infty",
        detail: format!(
            "max u^2 <= min u^2 + 2|u||u_x| on {} of {} snapshots; max |u|_inf beta^(1/4) = {scaled:.6e}",
            report.linf_checks.len() - failed,
            report.linf_checks.len()
        ),
        pass: Some(failed == 0),
    });
    let finals = report.final_normalized_rates();
    let raw = report.cumulative.last().map(|c| c.rates.values());
    for (i, name) in RATE_NAMES.iter().enumerate() {
        let v = (finals, raw);
        out.push(match v {
            (Some(n), Some(r)) => EstimateVerdict {
                name,
                detail: format!(
                    "integral up to T = {:.6e}: {:.6e}, normalized by eps^k: {:.6e}",
                    report.cumulative.last().map_or(0.0, |c| c.t),
                    r[i],
                    n[i]
                ),
                pass: Some(n[i].is_finite() && n[i] >= 0.0),
            },
            _ => EstimateVerdict {
                name,
                detail: "not applicable at eps = 0".into(),
                pass: None,
            },
        });
    }
    out
}

fn estimates_rows(report: &EstimateReport) -> Vec<Vec<f64>> {
    report
        .snapshots
        .iter()
        .zip(&report.cumulative)
        .zip(&report.linf_checks)
        .map(|((s, c), l)| {
            let mut row = vec![
                s.t, s.l2, s.l4, s.linf, s.grad_l2, s.hess_l2, s.energy, c.diss1, c.diss2,
            ];
            row.extend(c.rates.values());
            row.extend([c.l4func, l.lhs, l.rhs, l.scaled_linf]);
            row
        })
        .collect()
}

const ESTIMATES_HEADER: [&str; 17] = [
    "t",
    "l2",
    "l4",
    "linf",
    "ux_l2",
    "uxx_l2",
    "energy",
    "diss_eps",
    "diss_beta_eps",
    "ux_uxx",
    "uxx_l_2",
    "u_uxx_1",
    "u_ux_uxx",
    "l4_functional",
    "linf_lhs",
    "linf_rhs",
    "linf_scaled",
];

fn cmd_check_estimates(run: &Path) -> CmdResult {
    let loaded = read_run_dir(run)?;
    let traj = loaded.trajectory;
    if traj.snapshots.is_empty() {
        return Err(Failure::usage(format!("{}: no snapshots", run.display())));
    }
    let report = estimate_report(&traj);
    write_table(
        &run.join("estimates.csv"),
        &ESTIMATES_HEADER,
        &estimates_rows(&report),
    )?;
    let verdicts = estimate_verdicts(&report);
    let mut text = format!(
        "estimates for eps = {:e}, beta = {:e}, finite horizon T = {}\n",
        report.eps,
        report.beta,
        report.snapshots.last().map_or(0.0, |s| s.t)
    );
    let mut all_ok = true;
    for v in &verdicts {
        let tag = match v.pass {
            Some(ok) => {
                all_ok &= ok;
                verdict(ok)
            }
            None => "n/a ",
        };
        let _ = writeln!(text, "{tag} {:<10} {}", v.name, v.detail);
    }
    let _ = writeln!(text, "overall: {}", verdict(all_ok));
    write_text(&run.join("estimates_summary.txt"), &text)?;
    print!("{text}");
    Ok(if all_ok { EXIT_OK } else { EXIT_FAIL })
}

fn row_dir_name(i: usize, eps: f64) -> String {
    format!("run_{i:02}_eps_{eps:e}")
}

fn convergence_rows(table: &ConvergenceTable) -> (Vec<String>, Vec<Vec<String>>) {
    let mut header = vec!["eps".to_string(), "beta".to_string()];
    header.extend(table.p_exponents.iter().map(|p| format!("error_p{p}")));
    header.extend(["runtime_s".to_string(), "failure".to_string()]);
    let rows = table
        .rows
        .iter()
        .map(|r| {
            let mut row = vec![fmt_num(r.eps), fmt_num(r.beta)];
            if r.errors.is_empty() {
                row.extend(table.p_exponents.iter().map(|_| String::new()));
            } else {
                row.extend(r.errors.iter().map(|e| fmt_num(*e)));
            }
            row.push(r.runtime.map_or(String::new(), fmt_num));
            row.push(r.failure.clone().unwrap_or_default());
            row
        })
        .collect();
    (header, rows)
}

fn write_strings(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), Failure> {
    let err = |e: csv::Error| Failure::usage(format!("{}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for r in rows {
        w.write_record(r).map_err(err)?;
    }
    w.flush()
        .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn cmd_limit(
    config: &Path,
    out: Option<PathBuf>,
    jobs: usize,
    coupling_c: Option<f64>,
) -> CmdResult {
    let cfg = RunConfig::parse_file(config)?;
    if let Some(c) = coupling_c {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Failure::usage(format!(
                "--coupling-c must be positive, got {c}"
            )));
        }
    }
    let sweep: SweepConfig = cfg.sweep_config(coupling_c)?;
    let dir = out_dir(out, "limit");
    create_dir(&dir)?;
    let run = run_parallel(&sweep, jobs).map_err(|e| Failure::usage(format!("sweep: {e}")))?;
    let solver = sweep
        .solver_config()
        .map_err(|e| Failure::usage(e.to_string()))?;

    let mut estimate_lines = Vec::new();
    for o in &run.outcomes {
        let sub = dir.join(row_dir_name(o.index, o.eps));
        let datum = sweep.row_datum(o.eps);
        let (traj, failure) = match &o.run {
            Ok(t) => (t, None),
            Err(f) => (&f.partial, Some(f.error.to_string())),
        };
        let text = render_run_config(&sweep.grid, &traj.params, &datum, &solver);
        write_run_dir(&sub, traj, &text, failure.as_deref(), "")?;
        if failure.is_none() {
            let rep = estimate_report(traj);
            let mut row = vec![
                fmt_num(o.eps),
                fmt_num(o.beta),
                fmt_num(rep.max_over_time(|s| s.l2)),
                fmt_num(rep.max_over_time(|s| s.l4)),
                fmt_num(rep.max_over_time(|s| s.energy)),
            ];
            match rep.final_normalized_rates() {
                Some(n) => row.extend(n.iter().map(|v| fmt_num(*v))),
                None => row.extend((0..4).map(|_| String::new())),
            }
            row.push(rep.linf_checks.iter().all(|c| c.ok).to_string());
            estimate_lines.push(row);
        }
    }
    if let Some(r) = &run.reference {
        let p = KsParams::new(sweep.a_coeff, 0.0, 0.0, 0.0, 0.0, 0.0)
            .map_err(|e| Failure::usage(e.to_string()))?;
        let datum = sweep.row_datum(0.0);
        let text = render_run_config(&sweep.grid, &p, &datum, &solver);
        write_run_dir(&dir.join("reference"), r, &text, None, "")?;
    }

    let (header, rows) = convergence_rows(&run.table);
    write_strings(&dir.join("convergence.csv"), &header, &rows)?;
    let mut est_header: Vec<String> = ["eps", "beta", "max_l2", "max_l4", "max_energy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    est_header.extend(RATE_NAMES.iter().map(|n| format!("normalized_{n}")));
    est_header.push("linf_check".into());
    write_strings(
        &dir.join("estimates_summary.csv"),
        &est_header,
        &estimate_lines,
    )?;

    let mut summary = String::new();
    let table = &run.table;
    let _ = writeln!(
        summary,
        "sweep over eps = {:?} with coupling c = {}",
        sweep.eps_sequence, sweep.coupling_c
    );
    if table.coupling_violated {
        let _ = writeln!(summary, "WARNING: coupling violates beta = O(eps^4)");
    }
    if table.under_resolved {
        let _ = writeln!(summary, "WARNING: grid spacing exceeds eps_min / 4");
    }
    let mut order_rows = Vec::new();
    let mut all_ok = table.strictly_decreasing();
    let _ = writeln!(
        summary,
        "errors strictly decreasing for every p: {}",
        verdict(table.strictly_decreasing())
    );
    match empirical_order(table) {
        Ok(fits) => {
            for f in &fits {
                let ok = !f.no_convergence;
                all_ok &= ok;
                let _ = writeln!(
                    summary,
                    "{} p = {}: fitted order {:.4} over {} rows (rms residual {:.3e})",
                    verdict(ok),
                    f.p,
                    f.order,
                    f.rows_used,
                    f.residual
                );
                order_rows.push(vec![
                    fmt_num(f.p),
                    "fit".into(),
                    String::new(),
                    String::new(),
                    fmt_num(f.order),
                    fmt_num(f.residual),
                    f.rows_used.to_string(),
                ]);
            }
        }
        Err(e) => {
            all_ok = false;
            let _ = writeln!(summary, "FAIL no order fit: {e}");
        }
    }
    for (w, orders) in table.rows.windows(2).zip(&table.adjacent_orders) {
        for (k, o) in orders.iter().enumerate() {
            order_rows.push(vec![
                fmt_num(table.p_exponents[k]),
                "adjacent".into(),
                fmt_num(w[0].eps),
                fmt_num(w[1].eps),
                fmt_num(*o),
                String::new(),
                "2".into(),
            ]);
        }
    }
    let order_header: Vec<String> = [
        "p",
        "kind",
        "eps_from",
        "eps_to",
        "order",
        "residual",
        "rows_used",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    write_strings(&dir.join("orders.csv"), &order_header, &order_rows)?;
    let _ = writeln!(summary, "overall: {}", verdict(all_ok));
    write_text(&dir.join("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(if all_ok { EXIT_OK } else { EXIT_FAIL })
}

fn cmd_params(
    a: Option<f64>,
    n: Option<u32>,
    alpha: Option<f64>,
    csv: Option<PathBuf>,
) -> CmdResult {
    if a.is_none() && n.is_none() && alpha.is_none() {
        return Err(Failure::usage("params: give --a, or --n with --alpha"));
    }
    if n.is_some() != alpha.is_some() {
        return Err(Failure::usage("params: --n and --alpha go together"));
    }
    let mut text = String::new();
    let mut rows: Vec<Vec<String>> = Vec::new();
    if let Some(a) = a {
        if !a.is_finite() {
            return Err(Failure::usage("--a must be finite"));
        }
        let (b, c) = energy_preserving_coefficients(a);
        let p = KsParams::new(a, b, c, 0.0, 0.0, 0.0).map_err(|e| Failure::usage(e.to_string()))?;
        let (r1, r2) = p.constraint_residuals();
        let _ = writeln!(text, "{:<28}{a}", "A");
        let _ = writeln!(text, "{:<28}{b}", "B = 2A/3");
        let _ = writeln!(text, "{:<28}{c}", "C = -A/3");
        let _ = writeln!(text, "{:<28}0", "D");
        let _ = writeln!(text, "{:<28}{r1:e}, {r2:e}", "constraint residuals");
        let _ = writeln!(
            text,
            "{:<28}{}",
            "energy preserving",
            verify_constraint_system(&p)
        );
        for (k, v) in [("A", a), ("B", b), ("C", c), ("D", 0.0)] {
            rows.push(vec!["coefficients".into(), k.into(), fmt_num(v)]);
        }
    }
    if let (Some(n), Some(alpha)) = (n, alpha) {
        let prob = AppendixProblem::new(n, alpha).map_err(|e| Failure::usage(e.to_string()))?;
        let cert = two_roots_certificate(&prob);
        let _ = writeln!(text, "{:<28}{n}", "n");
        let _ = writeln!(text, "{:<28}{alpha}", "alpha");
        let _ = writeln!(text, "{:<28}{}", "X0", prob.x0());
        let _ = writeln!(text, "{:<28}{}", "alpha threshold", prob.alpha_threshold());
        let _ = writeln!(text, "{:<28}{cert}", "two roots (g(X0) <= 0)");
        rows.push(vec!["family".into(), "x0".into(), fmt_num(prob.x0())]);
        rows.push(vec![
            "family".into(),
            "certificate".into(),
            cert.to_string(),
        ]);
        if cert {
            let roots = appendix_roots(&prob).map_err(|e| Failure::usage(e.to_string()))?;
            let _ = writeln!(text, "{:<28}{}, {}", "roots X1, X2", roots.x1, roots.x2);
            if roots.boundary_root {
                let _ = writeln!(
                    text,
                    "{:<28}X2 = 0 gives C = 0 and is excluded",
                    "boundary root"
                );
            }
            for (i, (a_val, c_val)) in roots.admissible_coefficients().enumerate() {
                let (b_val, _) = energy_preserving_coefficients(a_val);
                let _ = writeln!(
                    text,
                    "{:<28}A = {a_val}, B = {b_val}, C = {c_val}",
                    format!("tuple {}", i + 1)
                );
                rows.push(vec!["family".into(), format!("A{}", i + 1), fmt_num(a_val)]);
                rows.push(vec!["family".into(), format!("C{}", i + 1), fmt_num(c_val)]);
            }
        }
    }
    print!("{text}");
    if let Some(path) = csv {
        let header: Vec<String> = ["section", "name", "value"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        write_strings(&path, &header, &rows)?;
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SCHEMA_VERSION;

    #[test]
    fn version_mentions_schema() {
        assert!(VERSION.contains(&format!("schema {SCHEMA_VERSION}")));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(dispatch(["kslab", "frobnicate"]), EXIT_USAGE);
        assert_eq!(dispatch(["kslab"]), EXIT_USAGE);
        assert_eq!(dispatch(["kslab", "params"]), EXIT_USAGE);
        assert_eq!(dispatch(["kslab", "params", "--n", "1"]), EXIT_USAGE);
    }

    #[test]
    fn params_for_a_one() {
        assert_eq!(dispatch(["kslab", "params", "--a", "1"]), EXIT_OK);
        assert_eq!(
            dispatch(["kslab", "params", "--n", "1", "--alpha", "-0.5"]),
            EXIT_OK
        );
    }
}
