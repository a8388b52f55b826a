//! Pseudo-spectral time integration of the regularized KS equation on a
//! periodic grid.
//!
//! The state is kept as a Fourier spectrum restricted to the retained modes
//! `|m| ≤ ⌊fraction·N/2⌋` (2/3 rule by default). The stiff linear part
//! `λ(k) = iβk³ − εk²` is integrated exactly through an integrating factor;
//! the nonlinear remainder
//!
//! ```text
//! N(u) = −[ ½A u u_x + ½A (u²/2)_x − Bβ (u u_xx)_x − Cβ u_x u_xx − Dβ (u u_x)_x ]
//! ```
//!
//! is advanced by the classical fourth-order Runge–Kutta weights (Lawson's
//! IFRK4). Every product is formed on the grid and truncated back to the
//! retained modes, which makes each quadratic product alias free.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::datum::{mollify, InitialDatum};
use crate::fft::Complex;
use crate::grid::{Field, Grid, Spectral};
use crate::params::KsParams;
use crate::{Error, Result};

/// Default 2/3 truncation.
pub const DEFAULT_DEALIAS_FRACTION: f64 = 2.0 / 3.0;

const TINY: f64 = f64::MIN_POSITIVE;

/// Time-stepping controls.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Advective CFL number in `(0, 1]`.
    pub cfl_advective: f64,
    /// CFL number for the explicit nonlinear dispersive terms, in `(0, 1]`.
    pub cfl_dispersive: f64,
    /// Final time.
    pub t_final: f64,
    /// Output times inside `[0, t_final]`, sorted.
    pub snapshot_times: Vec<f64>,
    /// Fraction of the resolvable band kept after each product.
    pub dealias_fraction: f64,
    /// Permit coefficients that break the energy-preserving constraint.
    pub allow_nonconservative: bool,
    /// Abort after this many steps.
    pub max_steps: usize,
}

impl SolverConfig {
    /// Config with default CFL numbers (0.5 advective, 0.25 dispersive).
    pub fn new(t_final: f64, snapshot_times: Vec<f64>) -> Result<Self> {
        let cfg = Self {
            cfl_advective: 0.5,
            cfl_dispersive: 0.25,
            t_final,
            snapshot_times,
            dealias_fraction: DEFAULT_DEALIAS_FRACTION,
            allow_nonconservative: false,
            max_steps: 50_000_000,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `count + 1` equally spaced outputs on `[0, t_final]`.
    pub fn uniform(t_final: f64, count: usize) -> Result<Self> {
        let count = count.max(1);
        let times = (0..=count)
            .map(|i| t_final * i as f64 / count as f64)
            .collect();
        Self::new(t_final, times)
    }

    /// Checks the invariants.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidParameter(msg));
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        for (name, c) in [
            ("cfl_advective", self.cfl_advective),
            ("cfl_dispersive", self.cfl_dispersive),
        ] {
            if !(c > 0.0 && c <= 1.0) {
                return bad(format!("{name} must lie in (0, 1], got {c}"));
            }
        }
        if !(self.dealias_fraction > 0.0 && self.dealias_fraction <= 1.0) {
            return bad(format!(
                "dealias_fraction must lie in (0, 1], got {}",
                self.dealias_fraction
            ));
        }
        if self
            .snapshot_times
            .iter()
            .any(|&t| !(0.0..=self.t_final).contains(&t))
        {
            return bad("snapshot times must lie in [0, t_final]".into());
        }
        if self.snapshot_times.windows(2).any(|w| w[1] < w[0]) {
            return bad("snapshot times must be sorted".into());
        }
        Ok(())
    }

    /// Output times actually used: the requested ones plus `0` and
    /// `t_final`, deduplicated.
    pub fn output_times(&self) -> Vec<f64> {
        let mut times = Vec::with_capacity(self.snapshot_times.len() + 2);
        times.push(0.0);
        times.extend(self.snapshot_times.iter().copied());
        times.push(self.t_final);
        times.sort_by(f64::total_cmp);
        times.dedup();
        times
    }
}

/// Dense per-step record of integral diagnostics.
///
/// `dissipation_eps` and `dissipation_beta_eps` are the cumulative
/// `2ε∫‖u_x‖²` and `2βε∫‖u_xx‖²`, integrated with the same RK4 stages that
/// advance the solution. The remaining integrands feed the trapezoid-rule
/// time integrals of [`crate::estimates`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepRecord {
    pub t: f64,
    /// Step that ended at `t` (zero for the initial record).
    pub dt: f64,
    pub mass: f64,
    /// `‖u‖² + β‖u_x‖²`.
    pub energy: f64,
    pub l2_sq: f64,
    pub grad_l2_sq: f64,
    pub hess_l2_sq: f64,
    pub l4_pow4: f64,
    pub linf: f64,
    pub dissipation_eps: f64,
    pub dissipation_beta_eps: f64,
    /// `‖u_x u_xx‖_{L¹}`.
    pub ux_uxx_l1: f64,
    /// `‖u u_xx‖²_{L²}`.
    pub u_uxx_l2_sq: f64,
    /// `‖u u_x u_xx‖_{L¹}`.
    pub u_ux_uxx_l1: f64,
    /// `‖u u_x‖²_{L²}`.
    pub u_ux_l2_sq: f64,
}

impl StepRecord {
    /// Total cumulative dissipation.
    pub fn dissipation(&self) -> f64 {
        self.dissipation_eps + self.dissipation_beta_eps
    }
}

/// A stored solution state.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub time: f64,
    pub field: Field,
    /// Index of the matching [`StepRecord`] in the trajectory log, when one
    /// exists.
    pub log_index: Option<usize>,
}

/// Non-fatal run diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    /// `|u|` exceeded `1e−6·‖u‖_∞` within 10% of the domain boundary.
    SupportNearBoundary { time: f64, max_abs_in_band: f64 },
    /// A requested CFL number was lowered to a stable value.
    CflReduced { requested: f64, used: f64 },
}

/// Solution history of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: KsParams,
    pub grid: Grid,
    pub snapshots: Vec<Snapshot>,
    pub step_count: usize,
    pub accepted_dt_history: Vec<f64>,
    pub log: Vec<StepRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Trajectory {
    /// Trajectory sampled from an analytic profile `u(t, x)`; no step log.
    pub fn from_fn(
        grid: Grid,
        params: KsParams,
        times: &[f64],
        profile: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let snapshots = times
            .iter()
            .map(|&t| Snapshot {
                time: t,
                field: Field::from_fn(grid, |x| profile(t, x)),
                log_index: None,
            })
            .collect();
        Self {
            params,
            grid,
            snapshots,
            step_count: 0,
            accepted_dt_history: Vec::new(),
            log: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    /// Snapshot times.
    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.time).collect()
    }

    /// Last snapshot.
    pub fn last(&self) -> Option<&Snapshot> {
        self.snapshots.last()
    }

    /// Log record belonging to snapshot `i`.
    pub fn record_for(&self, i: usize) -> Option<&StepRecord> {
        self.snapshots
            .get(i)
            .and_then(|s| s.log_index)
            .and_then(|k| self.log.get(k))
    }
}

/// A run that stopped early, with everything computed up to the failure.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationFailure {
    pub error: Error,
    pub partial: Trajectory,
}

/// Stage-integrated dissipation of one step.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepDissipation {
    /// `2ε∫‖u_x‖²` over the step.
    pub eps: f64,
    /// `2βε∫‖u_xx‖²` over the step.
    pub beta_eps: f64,
}

/// Spectral right-hand side and IFRK4 stepper for fixed coefficients.
#[derive(Debug, Clone)]
pub struct KsStepper {
    spectral: Spectral,
    params: KsParams,
    kmax: usize,
    linear: Vec<Complex>,
    ik: Vec<Complex>,
    mask: Vec<bool>,
    cached_dt: f64,
    e_half: Vec<Complex>,
    e_full: Vec<Complex>,
    // scratch
    ux_hat: Vec<Complex>,
    uxx_hat: Vec<Complex>,
    cbuf: Vec<Complex>,
    f1: Vec<Complex>,
    f2: Vec<Complex>,
    u: Vec<f64>,
    ux: Vec<f64>,
    uxx: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    zeros: Vec<Complex>,
    time: f64,
}

impl KsStepper {
    /// Prepares the operator for `grid` and `params`.
    pub fn new(grid: Grid, params: KsParams, dealias_fraction: f64) -> Self {
        let spectral = Spectral::new(grid);
        let n = grid.n_points();
        let kmax = retained_modes(n, dealias_fraction);
        let mask: Vec<bool> = (0..n).map(|j| spectral.mode_index(j) <= kmax).collect();
        let linear = (0..n)
            .map(|j| {
                let m2 = spectral.derivative_multiplier(j, 2);
                let m3 = spectral.derivative_multiplier(j, 3);
                m3.scale(-params.beta) + m2.scale(params.eps)
            })
            .collect();
        let ik = (0..n)
            .map(|j| spectral.derivative_multiplier(j, 1))
            .collect();
        let zc = vec![Complex::ZERO; n];
        let zr = vec![0.0; n];
        Self {
            spectral,
            params,
            kmax,
            linear,
            ik,
            mask,
            cached_dt: f64::NAN,
            e_half: zc.clone(),
            e_full: zc.clone(),
            ux_hat: zc.clone(),
            uxx_hat: zc.clone(),
            cbuf: zc.clone(),
            f1: zc.clone(),
            f2: zc.clone(),
            u: zr.clone(),
            ux: zr.clone(),
            uxx: zr.clone(),
            p1: zr.clone(),
            p2: zr,
            zeros: zc,
            time: 0.0,
        }
    }

    /// Highest retained mode index.
    pub fn kmax(&self) -> usize {
        self.kmax
    }

    /// The grid.
    pub fn grid(&self) -> &Grid {
        self.spectral.grid()
    }

    /// Spectral helper.
    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Sets the time stamp used in error reports.
    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    /// Spectrum of `f` restricted to the retained modes.
    pub fn project(&self, f: &Field) -> Result<Vec<Complex>> {
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        let mut spec = self.spectral.forward(f.values());
        self.apply_mask(&mut spec);
        Ok(spec)
    }

    fn apply_mask(&self, spec: &mut [Complex]) {
        for (z, &keep) in spec.iter_mut().zip(&self.mask) {
            if !keep {
                *z = Complex::ZERO;
            }
        }
    }

    /// Field whose spectrum is `spec`.
    pub fn to_field(&self, spec: &[Complex]) -> Field {
        Field::from_raw(*self.grid(), self.spectral.inverse_real(spec))
    }

    fn fill_derivatives(&mut self, state: &[Complex]) {
        for (((ux, uxx), &s), &ik) in self
            .ux_hat
            .iter_mut()
            .zip(self.uxx_hat.iter_mut())
            .zip(state)
            .zip(&self.ik)
        {
            *ux = s * ik;
            *uxx = *ux * ik;
        }
        let plan = self.spectral.plan();
        plan.inverse_real_pair(
            state,
            &self.ux_hat,
            &mut self.cbuf,
            &mut self.u,
            &mut self.ux,
        );
        plan.inverse_real_pair(
            &self.uxx_hat,
            &self.zeros,
            &mut self.cbuf,
            &mut self.uxx,
            &mut self.p1,
        );
    }

    /// Nonlinear remainder `N(û)` on the retained modes.
    pub fn nonlinear(&mut self, state: &[Complex], out: &mut [Complex]) -> Result<()> {
        self.fill_derivatives(state);
        let KsParams {
            a_coeff: a,
            b_coeff: b,
            c_coeff: c,
            d_coeff: d,
            beta,
            ..
        } = self.params;
        let (half_a, quarter_a) = (0.5 * a, 0.25 * a);
        let (bb, cb, db) = (b * beta, c * beta, d * beta);
        let mut finite = true;
        for j in 0..self.u.len() {
            let (u, ux, uxx) = (self.u[j], self.ux[j], self.uxx[j]);
            let p1 = half_a * u * ux - cb * ux * uxx;
            let p2 = quarter_a * u * u - bb * u * uxx - db * u * ux;
            finite &= p1.is_finite() && p2.is_finite();
            self.p1[j] = p1;
            self.p2[j] = p2;
        }
        if !finite {
            return Err(Error::Overflow {
                term: self.offending_term(),
                time: self.time,
            });
        }
        let plan = self.spectral.plan();
        plan.forward_real_pair(
            &self.p1,
            &self.p2,
            &mut self.cbuf,
            &mut self.f1,
            &mut self.f2,
        );
        for (j, o) in out.iter_mut().enumerate() {
            *o = if self.mask[j] {
                -(self.f1[j] + self.ik[j] * self.f2[j])
            } else {
                Complex::ZERO
            };
        }
        Ok(())
    }

    fn offending_term(&self) -> &'static str {
        let p = &self.params;
        for j in 0..self.u.len() {
            let (u, ux, uxx) = (self.u[j], self.ux[j], self.uxx[j]);
            if !(u.is_finite() && ux.is_finite() && uxx.is_finite()) {
                return "solution derivatives";
            }
            if !(p.a_coeff * u * ux).is_finite() || !(p.a_coeff * u * u).is_finite() {
                return "A u u_x";
            }
            if !(p.b_coeff * p.beta * u * uxx).is_finite() {
                return "B beta (u u_xx)_x";
            }
            if !(p.c_coeff * p.beta * ux * uxx).is_finite() {
                return "C beta u_x u_xx";
            }
            if !(p.d_coeff * p.beta * u * ux).is_finite() {
                return "D beta (u u_x)_x";
            }
        }
        "nonlinear sum"
    }

    /// Full right-hand side `λû + N(û)`.
    pub fn rhs(&mut self, state: &[Complex], out: &mut [Complex]) -> Result<()> {
        self.nonlinear(state, out)?;
        for j in 0..out.len() {
            if self.mask[j] {
                out[j] += self.linear[j] * state[j];
            }
        }
        Ok(())
    }

    fn dissipation_rates(&self, state: &[Complex]) -> (f64, f64) {
        let p = &self.params;
        if p.eps == 0.0 {
            return (0.0, 0.0);
        }
        let gx = self.spectral.derivative_l2_squared(state, 1);
        let gxx = if p.beta == 0.0 {
            0.0
        } else {
            self.spectral.derivative_l2_squared(state, 2)
        };
        (2.0 * p.eps * gx, 2.0 * p.beta * p.eps * gxx)
    }

    fn refresh_factors(&mut self, dt: f64) {
        if self.cached_dt == dt {
            return;
        }
        for j in 0..self.linear.len() {
            let eh = (self.linear[j] * (0.5 * dt)).exp();
            self.e_half[j] = eh;
            self.e_full[j] = eh * eh;
        }
        self.cached_dt = dt;
    }

    /// Advances `state` by `dt` in place; returns the dissipation integrated
    /// over the step.
    pub fn step(&mut self, state: &mut [Complex], dt: f64) -> Result<StepDissipation> {
        let n = state.len();
        self.refresh_factors(dt);
        let mut ka = vec![Complex::ZERO; n];
        let mut kb = vec![Complex::ZERO; n];
        let mut kc = vec![Complex::ZERO; n];
        let mut kd = vec![Complex::ZERO; n];
        let mut stage = vec![Complex::ZERO; n];

        let r1 = self.dissipation_rates(state);
        self.nonlinear(state, &mut ka)?;
        for j in 0..n {
            stage[j] = self.e_half[j] * (state[j] + ka[j] * (0.5 * dt));
        }
        let r2 = self.dissipation_rates(&stage);
        self.nonlinear(&stage, &mut kb)?;
        for j in 0..n {
            stage[j] = self.e_half[j] * state[j] + kb[j] * (0.5 * dt);
        }
        let r3 = self.dissipation_rates(&stage);
        self.nonlinear(&stage, &mut kc)?;
        for j in 0..n {
            stage[j] = self.e_full[j] * state[j] + self.e_half[j] * kc[j] * dt;
        }
        let r4 = self.dissipation_rates(&stage);
        self.nonlinear(&stage, &mut kd)?;
        let sixth = dt / 6.0;
        for j in 0..n {
            let incr = self.e_full[j] * ka[j] + self.e_half[j] * (kb[j] + kc[j]) * 2.0 + kd[j];
            state[j] = if self.mask[j] {
                self.e_full[j] * state[j] + incr * sixth
            } else {
                Complex::ZERO
            };
        }
        if state.iter().any(|z| !z.is_finite()) {
            return Err(Error::BlowUp {
                time: self.time + dt,
            });
        }
        self.time += dt;
        Ok(StepDissipation {
            eps: sixth * (r1.0 + 2.0 * r2.0 + 2.0 * r3.0 + r4.0),
            beta_eps: sixth * (r1.1 + 2.0 * r2.1 + 2.0 * r3.1 + r4.1),
        })
    }

    /// Integral diagnostics of `state`, with cumulative dissipation taken
    /// from `previous`.
    pub fn record(
        &mut self,
        state: &[Complex],
        t: f64,
        dt: f64,
        previous: Option<&StepRecord>,
        step: StepDissipation,
    ) -> StepRecord {
        self.fill_derivatives(state);
        let h = self.grid().spacing();
        let mut rec = StepRecord {
            t,
            dt,
            ..StepRecord::default()
        };
        let (mut mass, mut l4, mut linf) = (0.0, 0.0, 0.0f64);
        let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..self.u.len() {
            let (u, ux, uxx) = (self.u[j], self.ux[j], self.uxx[j]);
            mass += u;
            let u2 = u * u;
            l4 += u2 * u2;
            linf = linf.max(u.abs());
            a += (ux * uxx).abs();
            b += (u * uxx) * (u * uxx);
            c += (u * ux * uxx).abs();
            d += (u * ux) * (u * ux);
        }
        rec.mass = mass * h;
        rec.l4_pow4 = l4 * h;
        rec.linf = linf;
        rec.ux_uxx_l1 = a * h;
        rec.u_uxx_l2_sq = b * h;
        rec.u_ux_uxx_l1 = c * h;
        rec.u_ux_l2_sq = d * h;
        rec.l2_sq = self.spectral.l2_squared_from_spectrum(state);
        rec.grad_l2_sq = self.spectral.derivative_l2_squared(state, 1);
        rec.hess_l2_sq = self.spectral.derivative_l2_squared(state, 2);
        rec.energy = rec.l2_sq + self.params.beta * rec.grad_l2_sq;
        let (pe, pbe) =
            previous.map_or((0.0, 0.0), |p| (p.dissipation_eps, p.dissipation_beta_eps));
        rec.dissipation_eps = pe + step.eps;
        rec.dissipation_beta_eps = pbe + step.beta_eps;
        rec
    }

    fn physical_u(&self) -> &[f64] {
        &self.u
    }
}

fn retained_modes(n: usize, fraction: f64) -> usize {
    // small slack so that e.g. fraction = 1 keeps the Nyquist index exactly
    crate::math::floor(fraction * n as f64 / 2.0 + 1e-9) as usize
}

/// `−[A u u_x + β u_xxx − Bβ(u u_xx)_x − Cβ u_x u_xx − ε u_xx − Dβ(u u_x)_x]`
/// at the nodes, with 2/3 dealiasing.
pub fn ks_rhs(f: &Field, p: &KsParams) -> Result<Field> {
    let mut stepper = KsStepper::new(*f.grid(), *p, DEFAULT_DEALIAS_FRACTION);
    let state = stepper.project(f)?;
    let mut out = vec![Complex::ZERO; state.len()];
    stepper.rhs(&state, &mut out)?;
    Ok(stepper.to_field(&out))
}

/// Stable step size for the current state, capped at `t_next − t_now`.
///
/// ```text
/// dt = min( c_a·h / (|A|‖u‖_∞ + tiny),
///           c_d·h³ / (β(|B| + |C|)(‖u‖_∞ + 1) + tiny),
///           c_d·h² / (β|D|(‖u‖_∞ + 1) + tiny) )
/// ```
///
/// The last bound only binds for `D ≠ 0`.
pub fn select_timestep(
    f: &Field,
    p: &KsParams,
    cfg: &SolverConfig,
    t_now: f64,
    t_next: f64,
) -> f64 {
    let h = f.grid().spacing();
    let linf = f.max_abs();
    timestep_bound(h, linf, p, cfg).min(t_next - t_now)
}

fn timestep_bound(h: f64, linf: f64, p: &KsParams, cfg: &SolverConfig) -> f64 {
    let advective = cfg.cfl_advective * h / (p.a_coeff.abs() * linf + TINY);
    let dispersive = cfg.cfl_dispersive * h * h * h
        / (p.beta * (p.b_coeff.abs() + p.c_coeff.abs()) * (linf + 1.0) + TINY);
    let diffusive_d = cfg.cfl_dispersive * h * h / (p.beta * p.d_coeff.abs() * (linf + 1.0) + TINY);
    advective.min(dispersive).min(diffusive_d)
}

/// One IFRK4 step of size `dt` from `f` (projected onto the retained modes).
pub fn step(f: &Field, p: &KsParams, dt: f64) -> Result<Field> {
    let mut stepper = KsStepper::new(*f.grid(), *p, DEFAULT_DEALIAS_FRACTION);
    let mut state = stepper.project(f)?;
    stepper.step(&mut state, dt)?;
    let out = stepper.to_field(&state);
    if out.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::BlowUp { time: dt });
    }
    Ok(out)
}

fn boundary_band_max(f: &Field) -> f64 {
    let g = f.grid();
    let edge = 0.9 * g.half_length();
    g.nodes()
        .zip(f.values())
        .filter(|(x, _)| x.abs() > edge)
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

fn check_support(f: &Field, t: f64, diagnostics: &mut Vec<Diagnostic>) {
    let band = boundary_band_max(f);
    let scale = f.max_abs();
    if scale > 0.0 && band > 1e-6 * scale {
        diagnostics.push(Diagnostic::SupportNearBoundary {
            time: t,
            max_abs_in_band: band,
        });
    }
}

/// Mollifies `datum` and integrates to `cfg.t_final`.
///
/// The first snapshot is the mollified datum projected onto the retained
/// modes. Snapshots are hit exactly; every accepted step appends a
/// [`StepRecord`].
// the failure carries the partial trajectory on purpose
#[allow(clippy::result_large_err)]
pub fn simulate(
    datum: &InitialDatum,
    p: &KsParams,
    cfg: &SolverConfig,
    grid: &Grid,
) -> core::result::Result<Trajectory, SimulationFailure> {
    let empty = |error| SimulationFailure {
        error,
        partial: Trajectory {
            params: *p,
            grid: *grid,
            snapshots: Vec::new(),
            step_count: 0,
            accepted_dt_history: Vec::new(),
            log: Vec::new(),
            diagnostics: Vec::new(),
        },
    };
    if let Err(e) = cfg.validate() {
        return Err(empty(e));
    }
    if !p.energy_preserving_flag() && !cfg.allow_nonconservative {
        return Err(empty(Error::NotEnergyPreserving));
    }
    let initial = match mollify(datum, grid) {
        Ok(f) => f,
        Err(e) => return Err(empty(e)),
    };
    let mut stepper = KsStepper::new(*grid, *p, cfg.dealias_fraction);
    let mut state = match stepper.project(&initial) {
        Ok(s) => s,
        Err(e) => return Err(empty(e)),
    };
    let mut traj = empty(Error::BlowUp { time: 0.0 }).partial;

    let rec0 = stepper.record(&state, 0.0, 0.0, None, StepDissipation::default());
    traj.log.push(rec0);
    let field0 = Field::from_raw(*grid, stepper.physical_u().to_vec());
    check_support(&field0, 0.0, &mut traj.diagnostics);
    traj.snapshots.push(Snapshot {
        time: 0.0,
        field: field0,
        log_index: Some(0),
    });

    let h = grid.spacing();
    let mut t = 0.0;
    for &target in cfg.output_times().iter().skip(1) {
        while t < target {
            if traj.step_count >= cfg.max_steps {
                return Err(SimulationFailure {
                    error: Error::InvalidParameter(format!(
                        "step limit {} reached at t = {t}",
                        cfg.max_steps
                    )),
                    partial: traj,
                });
            }
            let linf = traj.log.last().map_or(0.0, |r| r.linf);
            let bound = timestep_bound(h, linf, p, cfg);
            let (dt, t_new) = if bound >= target - t {
                (target - t, target)
            } else {
                (bound, t + bound)
            };
            stepper.set_time(t);
            let dissipation = match stepper.step(&mut state, dt) {
                Ok(d) => d,
                Err(error) => {
                    return Err(SimulationFailure {
                        error,
                        partial: traj,
                    })
                }
            };
            t = t_new;
            traj.step_count += 1;
            traj.accepted_dt_history.push(dt);
            let rec = stepper.record(&state, t, dt, traj.log.last(), dissipation);
            if !(rec.energy.is_finite() && rec.linf.is_finite()) {
                return Err(SimulationFailure {
                    error: Error::BlowUp { time: t },
                    partial: traj,
                });
            }
            traj.log.push(rec);
        }
        let field = Field::from_raw(*grid, stepper.physical_u().to_vec());
        check_support(&field, t, &mut traj.diagnostics);
        traj.snapshots.push(Snapshot {
            time: t,
            field,
            log_index: Some(traj.log.len() - 1),
        });
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datum::DatumKind;
    use crate::grid::{norm, Norm};
    use core::f64::consts::PI;

    fn sine(n: usize) -> Field {
        Field::from_fn(Grid::new(PI, n).unwrap(), f64::sin)
    }

    #[test]
    fn rhs_of_constant_vanishes() {
        let g = Grid::new(PI, 32).unwrap();
        let f = Field::from_fn(g, |_| 2.5);
        let p = KsParams::new(1.3, 0.7, -0.2, 0.4, 0.3, 0.1).unwrap();
        assert!(ks_rhs(&f, &p).unwrap().max_abs() < 1e-12);
    }

    #[test]
    fn rhs_pure_advection_of_sine() {
        let f = sine(32);
        let p = KsParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let r = ks_rhs(&f, &p).unwrap();
        for (j, x) in f.grid().nodes().enumerate() {
            assert!((r.values()[j] + x.sin() * x.cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn rhs_dispersive_value_at_origin() {
        let f = sine(32);
        let origin = 16;
        assert_eq!(f.grid().node(origin), 0.0);
        for (a, b, c) in [
            (0.0, 0.0, 0.0),
            (1.0, 2.0 / 3.0, -1.0 / 3.0),
            (-2.0, 5.0, 3.0),
        ] {
            let p = KsParams::new(a, b, c, 0.0, 1.0, 0.0).unwrap();
            let r = ks_rhs(&f, &p).unwrap();
            assert!((r.values()[origin] - 1.0).abs() < 1e-10);
        }
        // the D term adds D·(u_x² + u u_xx) = D at the origin
        let p = KsParams::new(1.0, 0.0, 0.0, 0.5, 1.0, 0.0).unwrap();
        let r = ks_rhs(&f, &p).unwrap();
        assert!((r.values()[origin] - 1.5).abs() < 1e-10);
    }

    #[test]
    fn step_zero_is_fixed_point() {
        let g = Grid::new(PI, 32).unwrap();
        let p = KsParams::energy_preserving(1.0, 0.01, 0.1).unwrap();
        let out = step(&Field::zeros(g), &p, 0.1).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn step_heat_factor() {
        let f = sine(32);
        let eps = 0.01;
        let dt = 0.37;
        let p = KsParams::new(0.0, 0.0, 0.0, 0.0, 0.0, eps).unwrap();
        let out = step(&f, &p, dt).unwrap();
        let factor = (-eps * dt).exp();
        for (j, x) in f.grid().nodes().enumerate() {
            assert!((out.values()[j] - factor * x.sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn step_pure_dispersion_is_unitary() {
        let g = Grid::new(PI, 64).unwrap();
        let f = Field::from_fn(g, |x| x.sin() + 0.3 * (4.0 * x).cos());
        let p = KsParams::new(0.0, 0.0, 0.0, 0.0, 1.0, 0.0).unwrap();
        let out = step(&f, &p, 0.05).unwrap();
        assert!((norm(&out, Norm::L2) - norm(&f, Norm::L2)).abs() < 1e-12);
    }

    #[test]
    fn timestep_examples() {
        let g = Grid::new(PI, 64).unwrap();
        let p = KsParams::energy_preserving(1.0, 1e-4, 0.1).unwrap();
        let cfg = SolverConfig::uniform(1.0, 10).unwrap();
        let dt = select_timestep(&Field::zeros(g), &p, &cfg, 0.0, 0.1);
        assert_eq!(dt, 0.1);

        let p0 = KsParams::energy_preserving(1.0, 0.0, 0.1).unwrap();
        let f = Field::from_fn(g, f64::sin);
        let f2 = f.map(|v| 2.0 * v);
        let d1 = timestep_bound(g.spacing(), f.max_abs(), &p0, &cfg);
        let d2 = timestep_bound(g.spacing(), f2.max_abs(), &p0, &cfg);
        assert!((d1 / d2 - 2.0).abs() < 1e-12);

        // dispersive bound alone: A = 0 switches off the advective limit
        let pd = KsParams::new(0.0, 2.0 / 3.0, -1.0 / 3.0, 0.0, 1e-3, 0.0).unwrap();
        let h = g.spacing();
        let b1 = timestep_bound(h, 1.0, &pd, &cfg);
        let b2 = timestep_bound(h / 2.0, 1.0, &pd, &cfg);
        assert!((b1 / b2 - 8.0).abs() < 1e-9);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::new(0.0, vec![]).is_err());
        assert!(SolverConfig::new(1.0, vec![0.5, 1.5]).is_err());
        assert!(SolverConfig::new(1.0, vec![0.5, 0.2]).is_err());
        let mut c = SolverConfig::new(1.0, vec![0.5]).unwrap();
        assert_eq!(c.output_times(), vec![0.0, 0.5, 1.0]);
        c.cfl_advective = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn simulate_zero_datum() {
        let g = Grid::new(8.0, 64).unwrap();
        let p = KsParams::energy_preserving(1.0, 1e-4, 0.1).unwrap();
        let cfg = SolverConfig::uniform(1.0, 4).unwrap();
        let traj = simulate(&InitialDatum::zero(0.5), &p, &cfg, &g).unwrap();
        assert_eq!(traj.snapshots.len(), 5);
        assert!(traj.snapshots.iter().all(|s| s.field.max_abs() == 0.0));
        assert_eq!(traj.snapshots.last().unwrap().time, 1.0);
    }

    #[test]
    fn simulate_refuses_nonconservative_without_override() {
        let g = Grid::new(10.0, 64).unwrap();
        let p = KsParams::new(1.0, 1.0, 1.0, 0.0, 1e-4, 0.1).unwrap();
        let mut cfg = SolverConfig::uniform(0.1, 1).unwrap();
        let datum = InitialDatum::new(
            DatumKind::Gaussian {
                amplitude: 0.5,
                center: 0.0,
                width: 1.0,
            },
            0.2,
        );
        let err = simulate(&datum, &p, &cfg, &g).unwrap_err();
        assert_eq!(err.error, Error::NotEnergyPreserving);
        cfg.allow_nonconservative = true;
        simulate(&datum, &p, &cfg, &g).unwrap();
    }

    #[test]
    fn simulate_flags_support_near_boundary() {
        let g = Grid::new(4.0, 128).unwrap();
        let p = KsParams::energy_preserving(1.0, 0.0, 0.1).unwrap();
        let cfg = SolverConfig::uniform(0.1, 1).unwrap();
        let datum = InitialDatum::new(
            DatumKind::Custom {
                sample: alloc::sync::Arc::new(|_| 1.0),
                support: (-3.5, 3.5),
            },
            0.1,
        );
        let traj = simulate(&datum, &p, &cfg, &g).unwrap();
        assert!(traj
            .diagnostics
            .iter()
            .any(|d| matches!(d, Diagnostic::SupportNearBoundary { .. })));
    }
}
