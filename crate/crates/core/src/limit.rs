//! The ε → 0 experiment with `β = cε⁴`: one KS run per `ε`, a Burgers
//! reference, and space-time `L^p` errors on a window.
//!
//! Rows are independent. [`run_sweep_row`] and [`reference_solution`] are
//! exposed so callers can evaluate rows concurrently and assemble the table
//! with [`assemble_table`]; [`run_sweep`] does everything sequentially.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::burgers::{burgers_solve, riemann_exact};
use crate::datum::{default_mollification_width, DatumKind, InitialDatum};
use crate::grid::{Field, Grid};
use crate::math;
use crate::params::{coupling_beta, KsParams};
use crate::solver::{simulate, SimulationFailure, Snapshot, SolverConfig, Trajectory};
use crate::{Error, Result};

/// Space-time rectangle `[t_start, t_end] × [x_start, x_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub t_start: f64,
    pub t_end: f64,
    pub x_start: f64,
    pub x_end: f64,
}

impl Window {
    /// Checks ordering and that the window sits inside `grid`.
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        let l = grid.half_length();
        let ok = self.t_start >= 0.0
            && self.t_end > self.t_start
            && self.x_end > self.x_start
            && self.x_start >= -l
            && self.x_end <= l;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "window {self:?} is empty or leaves the domain [-{l}, {l}]"
            )))
        }
    }

    /// `(t_end − t_start)(x_end − x_start)`.
    pub fn area(&self) -> f64 {
        (self.t_end - self.t_start) * (self.x_end - self.x_start)
    }
}

const TIME_MATCH: f64 = 1e-12;

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_MATCH * (1.0 + a.abs().max(b.abs()))
}

/// Length of `[x_j − h/2, x_j + h/2] ∩ [lo, hi]` for every node.
fn overlap_weights(grid: &Grid, lo: f64, hi: f64) -> Vec<f64> {
    let h = grid.spacing();
    grid.nodes()
        .map(|x| {
            let a = (x - 0.5 * h).max(lo);
            let b = (x + 0.5 * h).min(hi);
            (b - a).max(0.0)
        })
        .collect()
}

fn check_exponent(p: f64) -> Result<()> {
    if (1.0..4.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

/// `∫_{x_start}^{x_end} |f − g|^p dx` with cell-overlap weights.
pub fn lp_space_integral(f: &Field, g: &Field, x_range: (f64, f64), p: f64) -> Result<f64> {
    if f.grid() != g.grid() {
        return Err(Error::GridMismatch);
    }
    let w = overlap_weights(f.grid(), x_range.0, x_range.1);
    Ok(f.values()
        .iter()
        .zip(g.values())
        .zip(&w)
        .filter(|(_, &w)| w > 0.0)
        .map(|((a, b), w)| w * math::powf((a - b).abs(), p))
        .sum())
}

/// `(∬_window |f − g|^p dx dt)^{1/p}`: cell-overlap weights in `x`,
/// trapezoid in `t` over the snapshots inside the window.
///
/// Both trajectories need the same grid and the same snapshot times on the
/// window, including snapshots at both window ends.
pub fn lp_window_error(f: &Trajectory, g: &Trajectory, window: &Window, p: f64) -> Result<f64> {
    check_exponent(p)?;
    if f.grid != g.grid {
        return Err(Error::GridMismatch);
    }
    let pick = |traj: &Trajectory| -> Vec<Snapshot> {
        traj.snapshots
            .iter()
            .filter(|s| {
                (s.time >= window.t_start || same_time(s.time, window.t_start))
                    && (s.time <= window.t_end || same_time(s.time, window.t_end))
            })
            .cloned()
            .collect()
    };
    let (fs, gs) = (pick(f), pick(g));
    let not_covered = Error::WindowNotCovered {
        t_start: window.t_start,
        t_end: window.t_end,
    };
    let covered = |s: &[Snapshot]| {
        s.len() >= 2
            && same_time(s[0].time, window.t_start)
            && same_time(s[s.len() - 1].time, window.t_end)
    };
    if !covered(&fs) || !covered(&gs) || fs.len() != gs.len() {
        return Err(not_covered);
    }
    if fs.iter().zip(&gs).any(|(a, b)| !same_time(a.time, b.time)) {
        return Err(not_covered);
    }
    let mut slices = Vec::with_capacity(fs.len());
    for (a, b) in fs.iter().zip(&gs) {
        slices.push(lp_space_integral(
            &a.field,
            &b.field,
            (window.x_start, window.x_end),
            p,
        )?);
    }
    let mut total = 0.0;
    for (w, s) in fs.windows(2).zip(slices.windows(2)) {
        total += 0.5 * (w[1].time - w[0].time) * (s[0] + s[1]);
    }
    Ok(math::powf(total, 1.0 / p))
}

/// How `β` follows `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    /// `β = cε⁴`.
    Quartic,
    /// `β = cε`; deliberately outside the admissible scaling.
    Linear,
}

/// Source of the limit solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reference {
    /// Godunov on a grid refined by `factor` (power of two), sampled at the
    /// coincident nodes.
    GodunovFine { factor: usize },
    /// Exact Riemann solution, for step data only.
    RiemannExact,
    /// The first KS row compared with itself (harness self-test).
    SelfComparison,
}

/// Mollification rule for the KS runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mollification {
    /// `max(ε, 2h)` per row.
    Auto,
    Fixed(f64),
}

/// Full sweep description.
#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub eps_sequence: Vec<f64>,
    pub coupling_c: f64,
    pub coupling: Coupling,
    pub datum: DatumKind,
    pub mollification: Mollification,
    pub a_coeff: f64,
    pub grid: Grid,
    pub window: Window,
    /// Number of equal time intervals sampled across the window.
    pub window_samples: usize,
    pub p_exponents: Vec<f64>,
    pub reference: Reference,
    pub cfl_advective: f64,
    pub cfl_dispersive: f64,
}

impl SweepConfig {
    /// Checks the invariants listed on each field.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if self.eps_sequence.is_empty() {
            return bad("eps_sequence is empty".into());
        }
        if self
            .eps_sequence
            .iter()
            .any(|&e| !(e > 0.0 && e.is_finite()))
        {
            return bad("eps values must be positive".into());
        }
        if self.eps_sequence.windows(2).any(|w| w[1] >= w[0]) {
            return bad("eps_sequence must be strictly decreasing".into());
        }
        if !(self.coupling_c > 0.0 && self.coupling_c.is_finite()) {
            return bad(format!(
                "coupling_c must be positive, got {}",
                self.coupling_c
            ));
        }
        if self.a_coeff == 0.0 || !self.a_coeff.is_finite() {
            return Err(Error::DegenerateTransport);
        }
        if self.p_exponents.is_empty() {
            return bad("p_exponents is empty".into());
        }
        for &p in &self.p_exponents {
            check_exponent(p)?;
        }
        if self.window_samples == 0 {
            return bad("window_samples must be positive".into());
        }
        self.window.validate(&self.grid)?;
        if let Reference::GodunovFine { factor } = self.reference {
            if !factor.is_power_of_two() {
                return bad(format!("refinement factor {factor} is not a power of two"));
            }
        }
        if self.reference == Reference::RiemannExact
            && !matches!(self.datum, DatumKind::RiemannStep { .. })
        {
            return bad("the exact Riemann reference needs step data".into());
        }
        self.solver_config().map(|_| ())
    }

    /// `β` for one `ε` under the configured coupling.
    pub fn beta(&self, eps: f64) -> Result<f64> {
        match self.coupling {
            Coupling::Quartic => coupling_beta(eps, self.coupling_c),
            Coupling::Linear => Ok(self.coupling_c * eps),
        }
    }

    /// Whether the grid resolves the smallest `ε` (`h ≤ ε_min/4`).
    pub fn resolved(&self) -> bool {
        let eps_min = self
            .eps_sequence
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        self.grid.spacing() <= eps_min / 4.0
    }

    /// Output times: `t = 0` plus `window_samples + 1` equally spaced times
    /// across the window.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let w = &self.window;
        let mut times = Vec::with_capacity(self.window_samples + 2);
        times.push(0.0);
        for i in 0..=self.window_samples {
            let s = i as f64 / self.window_samples as f64;
            let t = if i == self.window_samples {
                w.t_end
            } else {
                w.t_start + s * (w.t_end - w.t_start)
            };
            times.push(t);
        }
        times.dedup();
        times
    }

    /// Solver settings shared by all rows.
    pub fn solver_config(&self) -> Result<SolverConfig> {
        let mut cfg = SolverConfig::new(self.window.t_end, self.snapshot_times())?;
        cfg.cfl_advective = self.cfl_advective;
        cfg.cfl_dispersive = self.cfl_dispersive;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Initial datum of the row with this `ε`.
    pub fn row_datum(&self, eps: f64) -> InitialDatum {
        let width = match self.mollification {
            Mollification::Auto => default_mollification_width(eps, &self.grid),
            Mollification::Fixed(w) => w,
        };
        InitialDatum::new(self.datum.clone(), width)
    }
}

/// Result of one KS run of the sweep.
#[derive(Debug, Clone)]
pub struct RowOutcome {
    pub index: usize,
    pub eps: f64,
    pub beta: f64,
    pub run: core::result::Result<Trajectory, SimulationFailure>,
}

/// Runs row `index` of the sweep.
pub fn run_sweep_row(cfg: &SweepConfig, index: usize) -> Result<RowOutcome> {
    let eps = *cfg
        .eps_sequence
        .get(index)
        .ok_or_else(|| Error::InvalidParameter(format!("no sweep row {index}")))?;
    let beta = cfg.beta(eps)?;
    let params = KsParams::energy_preserving(cfg.a_coeff, beta, eps)?;
    let solver = cfg.solver_config()?;
    let run = simulate(&cfg.row_datum(eps), &params, &solver, &cfg.grid);
    Ok(RowOutcome {
        index,
        eps,
        beta,
        run,
    })
}

/// Keeps every `factor`-th node of a refined field.
pub fn restrict_to(f: &Field, coarse: &Grid) -> Result<Field> {
    let fine = f.grid();
    let (nf, nc) = (fine.n_points(), coarse.n_points());
    if fine.half_length() != coarse.half_length() || nf % nc != 0 {
        return Err(Error::GridMismatch);
    }
    let stride = nf / nc;
    Field::new(
        *coarse,
        f.values().iter().step_by(stride).copied().collect(),
    )
}

/// Limit solution sampled on the sweep grid at the sweep snapshot times.
/// `None` for [`Reference::SelfComparison`].
pub fn reference_solution(cfg: &SweepConfig) -> Result<Option<Trajectory>> {
    let times = cfg.snapshot_times();
    let t_final = cfg.window.t_end;
    let params = KsParams::new(cfg.a_coeff, 0.0, 0.0, 0.0, 0.0, 0.0)?;
    match cfg.reference {
        Reference::SelfComparison => Ok(None),
        Reference::GodunovFine { factor } => {
            let fine = cfg.grid.refined(factor)?;
            let datum = InitialDatum::new(cfg.datum.clone(), 2.0 * fine.spacing());
            let traj = burgers_solve(&datum, cfg.a_coeff, &fine, t_final, &times)?;
            let mut snapshots = Vec::with_capacity(traj.snapshots.len());
            for s in &traj.snapshots {
                snapshots.push(Snapshot {
                    time: s.time,
                    field: restrict_to(&s.field, &cfg.grid)?,
                    log_index: None,
                });
            }
            Ok(Some(Trajectory {
                params,
                grid: cfg.grid,
                snapshots,
                step_count: traj.step_count,
                accepted_dt_history: Vec::new(),
                log: Vec::new(),
                diagnostics: Vec::new(),
            }))
        }
        Reference::RiemannExact => {
            let DatumKind::RiemannStep {
                u_left,
                u_right,
                position,
                ..
            } = cfg.datum
            else {
                return Err(Error::InvalidParameter(
                    "the exact Riemann reference needs step data".into(),
                ));
            };
            let a = cfg.a_coeff;
            // the outer edges of the step are outside the window by assumption
            let profile = move |t: f64, x: f64| {
                if t == 0.0 {
                    if x < position {
                        u_left
                    } else {
                        u_right
                    }
                } else {
                    riemann_exact(u_left, u_right, a, (x - position) / t).unwrap_or(0.0)
                }
            };
            Ok(Some(Trajectory::from_fn(cfg.grid, params, &times, profile)))
        }
    }
}

/// One table row.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub eps: f64,
    pub beta: f64,
    /// One error per entry of `p_exponents`; empty when the run failed.
    pub errors: Vec<f64>,
    /// Failure description, if the KS run or the error evaluation failed.
    pub failure: Option<String>,
    /// Wall-clock seconds, when the caller measured them.
    pub runtime: Option<f64>,
}

impl ConvergenceRow {
    /// True when the run produced errors.
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

/// Sweep results, rows ordered by decreasing `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub p_exponents: Vec<f64>,
    pub rows: Vec<ConvergenceRow>,
    /// `adjacent_orders[i][k]` = `ln(e_i/e_{i+1}) / ln(ε_i/ε_{i+1})` for
    /// exponent `k`; `NaN` where either row failed.
    pub adjacent_orders: Vec<Vec<f64>>,
    pub coupling_violated: bool,
    /// `h > ε_min/4`.
    pub under_resolved: bool,
}

impl ConvergenceTable {
    /// Errors for exponent index `k` over the successful rows, with their
    /// `ε`.
    pub fn series(&self, k: usize) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.succeeded())
            .map(|r| (r.eps, r.errors[k]))
            .collect()
    }

    /// True when every exponent's errors strictly decrease down the table
    /// and no row failed.
    pub fn strictly_decreasing(&self) -> bool {
        self.rows.iter().all(|r| r.succeeded())
            && (0..self.p_exponents.len()).all(|k| {
                self.rows
                    .windows(2)
                    .all(|w| w[1].errors[k] < w[0].errors[k])
            })
    }
}

/// Builds the table from row outcomes (any order) and the reference.
pub fn assemble_table(
    cfg: &SweepConfig,
    mut outcomes: Vec<RowOutcome>,
    reference: Option<&Trajectory>,
    runtimes: Option<&[f64]>,
) -> ConvergenceTable {
    outcomes.sort_by_key(|o| o.index);
    let self_ref = outcomes.first().and_then(|o| o.run.as_ref().ok()).cloned();
    let reference = reference.or(self_ref.as_ref());
    let rows: Vec<ConvergenceRow> = outcomes
        .iter()
        .map(|o| {
            let runtime = runtimes.and_then(|r| r.get(o.index).copied());
            let result = match (&o.run, reference) {
                (Err(fail), _) => Err(format!("{}", fail.error)),
                (Ok(_), None) => Err("no reference solution".into()),
                (Ok(traj), Some(r)) => cfg
                    .p_exponents
                    .iter()
                    .map(|&p| lp_window_error(traj, r, &cfg.window, p))
                    .collect::<Result<Vec<f64>>>()
                    .map_err(|e| format!("{e}")),
            };
            match result {
                Ok(errors) => ConvergenceRow {
                    eps: o.eps,
                    beta: o.beta,
                    errors,
                    failure: None,
                    runtime,
                },
                Err(msg) => ConvergenceRow {
                    eps: o.eps,
                    beta: o.beta,
                    errors: Vec::new(),
                    failure: Some(msg),
                    runtime,
                },
            }
        })
        .collect();
    let adjacent_orders = rows
        .windows(2)
        .map(|w| {
            (0..cfg.p_exponents.len())
                .map(|k| {
                    if w[0].succeeded() && w[1].succeeded() {
                        math::ln(w[0].errors[k] / w[1].errors[k]) / math::ln(w[0].eps / w[1].eps)
                    } else {
                        f64::NAN
                    }
                })
                .collect()
        })
        .collect();
    ConvergenceTable {
        p_exponents: cfg.p_exponents.clone(),
        rows,
        adjacent_orders,
        coupling_violated: cfg.coupling != Coupling::Quartic,
        under_resolved: !cfg.resolved(),
    }
}

/// Runs every row and the reference sequentially.
pub fn run_sweep(cfg: &SweepConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let reference = reference_solution(cfg)?;
    let outcomes = (0..cfg.eps_sequence.len())
        .map(|i| run_sweep_row(cfg, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(assemble_table(cfg, outcomes, reference.as_ref(), None))
}

/// Least-squares fit of `ln e = order·ln ε + const` for one exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub p: f64,
    pub order: f64,
    /// Root-mean-square residual of the fit in `ln e`.
    pub residual: f64,
    pub rows_used: usize,
    /// Set when the fitted order is not positive.
    pub no_convergence: bool,
}

/// Orders below this count as no convergence.
pub const NO_CONVERGENCE_THRESHOLD: f64 = 1e-9;

/// Fits `order` for every exponent; needs at least three successful rows
/// with positive errors.
pub fn empirical_order(table: &ConvergenceTable) -> Result<Vec<OrderFit>> {
    let mut fits = Vec::with_capacity(table.p_exponents.len());
    for (k, &p) in table.p_exponents.iter().enumerate() {
        let pts: Vec<(f64, f64)> = table
            .series(k)
            .into_iter()
            .filter(|&(e, err)| e > 0.0 && err > 0.0 && err.is_finite())
            .map(|(e, err)| (math::ln(e), math::ln(err)))
            .collect();
        if pts.len() < 3 {
            return Err(Error::TooFewRows {
                needed: 3,
                got: pts.len(),
            });
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx == 0.0 {
            return Err(Error::InvalidParameter("all eps values coincide".into()));
        }
        let order = sxy / sxx;
        let intercept = my - order * mx;
        let ss: f64 = pts
            .iter()
            .map(|p| {
                let r = p.1 - (order * p.0 + intercept);
                r * r
            })
            .sum();
        fits.push(OrderFit {
            p,
            order,
            residual: math::sqrt(ss / n),
            rows_used: pts.len(),
            no_convergence: order <= NO_CONVERGENCE_THRESHOLD,
        });
    }
    Ok(fits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn synthetic(errors: &[f64]) -> ConvergenceTable {
        let eps = [0.2, 0.1, 0.05, 0.025];
        ConvergenceTable {
            p_exponents: vec![1.0],
            rows: errors
                .iter()
                .zip(eps)
                .map(|(&e, eps)| ConvergenceRow {
                    eps,
                    beta: eps * eps * eps * eps,
                    errors: vec![e],
                    failure: None,
                    runtime: None,
                })
                .collect(),
            adjacent_orders: Vec::new(),
            coupling_violated: false,
            under_resolved: false,
        }
    }

    #[test]
    fn exact_power_laws() {
        let eps = [0.2f64, 0.1, 0.05, 0.025];
        let fit = empirical_order(&synthetic(&eps)).unwrap()[0];
        assert!((fit.order - 1.0).abs() < 1e-12 && !fit.no_convergence);
        let half: Vec<f64> = eps.iter().map(|e| e.sqrt()).collect();
        let fit = empirical_order(&synthetic(&half)).unwrap()[0];
        assert!((fit.order - 0.5).abs() < 1e-12);
        let fit = empirical_order(&synthetic(&[0.3; 4])).unwrap()[0];
        assert!(fit.order.abs() < 1e-12 && fit.no_convergence);
        assert_eq!(
            empirical_order(&synthetic(&[0.3, 0.2])),
            Err(Error::TooFewRows { needed: 3, got: 2 })
        );
    }

    fn constant_traj(grid: Grid, times: &[f64], c: f64) -> Trajectory {
        let p = KsParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        Trajectory::from_fn(grid, p, times, move |_, _| c)
    }

    #[test]
    fn window_error_of_constant_difference() {
        let g = Grid::new(4.0, 128).unwrap();
        let times = [0.0, 0.5, 0.6, 0.8, 1.0];
        let w = Window {
            t_start: 0.5,
            t_end: 1.0,
            x_start: -2.0,
            x_end: 2.0,
        };
        let f = constant_traj(g, &times, 0.7);
        let z = constant_traj(g, &times, 0.0);
        for p in [1.0, 2.0, 3.0] {
            assert_eq!(lp_window_error(&f, &f, &w, p).unwrap(), 0.0);
            let e = lp_window_error(&f, &z, &w, p).unwrap();
            assert!((e - 0.7 * math::powf(w.area(), 1.0 / p)).abs() < 1e-12);
        }
        assert_eq!(
            lp_window_error(&f, &z, &w, 4.0),
            Err(Error::InvalidExponent(4.0))
        );
        let short = constant_traj(g, &[0.0, 0.5, 0.9], 0.0);
        assert!(matches!(
            lp_window_error(&f, &short, &w, 1.0),
            Err(Error::WindowNotCovered { .. })
        ));
    }

    #[test]
    fn restrict_keeps_coincident_nodes() {
        let coarse = Grid::new(2.0, 32).unwrap();
        let fine = coarse.refined(8).unwrap();
        let f = Field::from_fn(fine, |x| x * x);
        let r = restrict_to(&f, &coarse).unwrap();
        for (j, x) in coarse.nodes().enumerate() {
            assert_eq!(r.values()[j], x * x);
        }
    }
}
