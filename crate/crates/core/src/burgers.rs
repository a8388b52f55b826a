//! Entropy-solution reference for `u_t + (A u²/2)_x = 0`: exact Riemann
//! solutions, a first-order Godunov scheme, entropy pairs and space-time
//! residuals against separable test functions.

use alloc::format;
use alloc::vec::Vec;

use crate::datum::{mollify, InitialDatum};
use crate::grid::{Field, Grid};
use crate::math;
use crate::params::KsParams;
use crate::solver::{Snapshot, Trajectory};
use crate::{Error, Result};

/// Godunov CFL number.
pub const GODUNOV_CFL: f64 = 0.9;

/// Self-similar solution of the Riemann problem at `ξ = x/t`.
pub fn riemann_exact(u_l: f64, u_r: f64, a_coeff: f64, xi: f64) -> Result<f64> {
    if a_coeff == 0.0 {
        return Err(Error::DegenerateTransport);
    }
    if a_coeff < 0.0 {
        return Ok(-riemann_exact(-u_l, -u_r, -a_coeff, xi)?);
    }
    if u_l > u_r {
        let speed = 0.5 * a_coeff * (u_l + u_r);
        Ok(if xi < speed { u_l } else { u_r })
    } else if xi <= a_coeff * u_l {
        Ok(u_l)
    } else if xi >= a_coeff * u_r {
        Ok(u_r)
    } else {
        Ok(xi / a_coeff)
    }
}

/// Godunov numerical flux for `f(u) = A u²/2`.
pub fn godunov_flux(u_l: f64, u_r: f64, a_coeff: f64) -> f64 {
    let f = |u: f64| 0.5 * a_coeff * u * u;
    let (fl, fr) = (f(u_l), f(u_r));
    let zero_inside = u_l.min(u_r) < 0.0 && 0.0 < u_l.max(u_r);
    if u_l <= u_r {
        let m = fl.min(fr);
        if zero_inside {
            m.min(0.0)
        } else {
            m
        }
    } else {
        let m = fl.max(fr);
        if zero_inside {
            m.max(0.0)
        } else {
            m
        }
    }
}

/// One Godunov step of size `dt` on periodic cell averages.
fn godunov_update(u: &[f64], next: &mut [f64], flux: &mut [f64], a_coeff: f64, ratio: f64) {
    let n = u.len();
    // flux[j] is the flux through the right face of cell j
    for j in 0..n {
        flux[j] = godunov_flux(u[j], u[(j + 1) % n], a_coeff);
    }
    for j in 0..n {
        let left = flux[(j + n - 1) % n];
        next[j] = u[j] - ratio * (flux[j] - left);
    }
}

/// First-order Godunov solution from the mollified datum. Snapshot times
/// are hit exactly; the step obeys `dt·|A|·max|u| ≤ 0.9·h`.
pub fn burgers_solve(
    datum: &InitialDatum,
    a_coeff: f64,
    grid: &Grid,
    t_final: f64,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    let initial = mollify(datum, grid)?;
    burgers_solve_field(&initial, a_coeff, t_final, snapshot_times)
}

/// [`burgers_solve`] started from an explicit field of cell averages.
pub fn burgers_solve_field(
    initial: &Field,
    a_coeff: f64,
    t_final: f64,
    snapshot_times: &[f64],
) -> Result<Trajectory> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "t_final must be positive, got {t_final}"
        )));
    }
    if snapshot_times
        .iter()
        .any(|&t| !(0.0..=t_final).contains(&t))
    {
        return Err(Error::InvalidParameter(
            "snapshot times must lie in [0, t_final]".into(),
        ));
    }
    let grid = *initial.grid();
    let mut times: Vec<f64> = snapshot_times.to_vec();
    times.push(0.0);
    times.push(t_final);
    times.sort_by(f64::total_cmp);
    times.dedup();

    let params = KsParams::new(a_coeff, 0.0, 0.0, 0.0, 0.0, 0.0)?;
    let h = grid.spacing();
    let mut u = initial.values().to_vec();
    let mut next = u.clone();
    let mut flux = u.clone();
    let mut traj = Trajectory {
        params,
        grid,
        snapshots: Vec::with_capacity(times.len()),
        step_count: 0,
        accepted_dt_history: Vec::new(),
        log: Vec::new(),
        diagnostics: Vec::new(),
    };
    traj.snapshots.push(Snapshot {
        time: 0.0,
        field: initial.clone(),
        log_index: None,
    });
    let mut t = 0.0;
    for &target in times.iter().skip(1) {
        while t < target {
            let speed = a_coeff.abs() * u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let bound = if speed > 0.0 {
                GODUNOV_CFL * h / speed
            } else {
                f64::INFINITY
            };
            let (dt, t_new) = if bound >= target - t {
                (target - t, target)
            } else {
                (bound, t + bound)
            };
            godunov_update(&u, &mut next, &mut flux, a_coeff, dt / h);
            core::mem::swap(&mut u, &mut next);
            t = t_new;
            traj.step_count += 1;
            traj.accepted_dt_history.push(dt);
        }
        traj.snapshots.push(Snapshot {
            time: t,
            field: Field::new(grid, u.clone())?,
            log_index: None,
        });
    }
    Ok(traj)
}

/// Shape of an entropy `η`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EntropyKind {
    /// `η = u²`.
    Square,
    /// `η = √((u − k)² + δ²)`, a smoothed `|u − k|`.
    KruzhkovSmoothed { k: f64, delta: f64 },
    /// `η = exp(−1/(1 − s²))`, `s = (u − center)/radius`, zero for `|s| ≥ 1`.
    CompactBump { center: f64, radius: f64 },
}

impl EntropyKind {
    /// Short label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Square => "square",
            Self::KruzhkovSmoothed { .. } => "kruzhkov_smoothed",
            Self::CompactBump { .. } => "compact_bump",
        }
    }
}

/// Range of `u` covered by the cached flux table.
const TABLE_RANGE: f64 = 4.0;
const SIMPSON_TOL: f64 = 1e-14;
const SIMPSON_DEPTH: u32 = 40;

#[derive(Debug, Clone)]
struct FluxTable {
    step: f64,
    // nodes i·step for i in 0..=n on each side of zero
    pos: Vec<f64>,
    neg: Vec<f64>,
}

/// An entropy `η` with flux `q(u) = ∫₀ᵘ A ξ η′(ξ) dξ`.
#[derive(Debug, Clone)]
pub struct EntropyPair {
    kind: EntropyKind,
    a_coeff: f64,
    table: Option<FluxTable>,
}

/// Builds the pair; `q` is tabulated by adaptive quadrature except for the
/// square entropy, where `q = 2Au³/3`. Lookups add the integral from the
/// nearest table node, so `q′ = Auη′` holds to quadrature accuracy.
pub fn make_entropy_pair(kind: EntropyKind, a_coeff: f64) -> Result<EntropyPair> {
    if !a_coeff.is_finite() {
        return Err(Error::InvalidParameter("A must be finite".into()));
    }
    let step = match kind {
        EntropyKind::Square => None,
        EntropyKind::KruzhkovSmoothed { k, delta } => {
            if !(delta > 0.0 && delta.is_finite() && k.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "kruzhkov_smoothed needs delta > 0, got {delta}"
                )));
            }
            Some(0.01f64.min(delta / 4.0))
        }
        EntropyKind::CompactBump { center, radius } => {
            if !(radius > 0.0 && radius.is_finite() && center.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "compact_bump needs radius > 0, got {radius}"
                )));
            }
            Some(0.01f64.min(radius / 50.0))
        }
    };
    let mut pair = EntropyPair {
        kind,
        a_coeff,
        table: None,
    };
    if let Some(step) = step {
        let n = math::ceil(TABLE_RANGE / step) as usize;
        let build = |sign: f64| {
            let mut acc = 0.0;
            let mut nodes = Vec::with_capacity(n + 1);
            nodes.push(0.0);
            for i in 0..n {
                let lo = sign * step * i as f64;
                let hi = sign * step * (i + 1) as f64;
                acc += pair.integrate_flux_density(lo, hi);
                nodes.push(acc);
            }
            nodes
        };
        let pos = build(1.0);
        let neg = build(-1.0);
        pair.table = Some(FluxTable { step, pos, neg });
    }
    Ok(pair)
}

impl EntropyPair {
    /// The entropy kind.
    pub fn kind(&self) -> EntropyKind {
        self.kind
    }

    /// Transport coefficient `A`.
    pub fn a_coeff(&self) -> f64 {
        self.a_coeff
    }

    /// `η(u)`.
    pub fn eta(&self, u: f64) -> f64 {
        match self.kind {
            EntropyKind::Square => u * u,
            EntropyKind::KruzhkovSmoothed { k, delta } => {
                let s = u - k;
                math::sqrt(s * s + delta * delta)
            }
            EntropyKind::CompactBump { center, radius } => {
                let s = (u - center) / radius;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    math::exp(-1.0 / (1.0 - s * s))
                }
            }
        }
    }

    /// `η′(u)`.
    pub fn eta_prime(&self, u: f64) -> f64 {
        match self.kind {
            EntropyKind::Square => 2.0 * u,
            EntropyKind::KruzhkovSmoothed { k, delta } => {
                let s = u - k;
                s / math::sqrt(s * s + delta * delta)
            }
            EntropyKind::CompactBump { center, radius } => {
                let s = (u - center) / radius;
                if s.abs() >= 1.0 {
                    return 0.0;
                }
                let w = 1.0 - s * s;
                let g1 = -2.0 * s / (w * w);
                g1 * math::exp(-1.0 / w) / radius
            }
        }
    }

    /// `η″(u)`.
    pub fn eta_second(&self, u: f64) -> f64 {
        match self.kind {
            EntropyKind::Square => 2.0,
            EntropyKind::KruzhkovSmoothed { k, delta } => {
                let s = u - k;
                let r2 = s * s + delta * delta;
                delta * delta / (r2 * math::sqrt(r2))
            }
            EntropyKind::CompactBump { center, radius } => {
                let s = (u - center) / radius;
                if s.abs() >= 1.0 {
                    return 0.0;
                }
                let w = 1.0 - s * s;
                let g1 = -2.0 * s / (w * w);
                let g2 = -2.0 / (w * w) - 8.0 * s * s / (w * w * w);
                (g2 + g1 * g1) * math::exp(-1.0 / w) / (radius * radius)
            }
        }
    }

    /// `q′(u) = A u η′(u)`.
    pub fn q_prime(&self, u: f64) -> f64 {
        self.a_coeff * u * self.eta_prime(u)
    }

    fn integrate_flux_density(&self, lo: f64, hi: f64) -> f64 {
        let f = |x: f64| self.q_prime(x);
        let (fa, fb) = (f(lo), f(hi));
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        adaptive_simpson(&f, lo, hi, fa, fm, fb, whole, SIMPSON_TOL, SIMPSON_DEPTH)
    }

    /// `q(u)`, with `q(0) = 0`.
    pub fn q(&self, u: f64) -> f64 {
        let Some(table) = &self.table else {
            return 2.0 * self.a_coeff * u * u * u / 3.0;
        };
        let (nodes, sign) = if u >= 0.0 {
            (&table.pos, 1.0)
        } else {
            (&table.neg, -1.0)
        };
        let r = u.abs() / table.step;
        let last = nodes.len() - 1;
        if r >= last as f64 {
            let edge = sign * table.step * last as f64;
            return nodes[last] + self.integrate_flux_density(edge, u);
        }
        // nearest cached node at or below |u|, then the remainder exactly
        let i = math::floor(r) as usize;
        let x0 = sign * table.step * i as f64;
        nodes[i] + self.integrate_flux_density(x0, u)
    }
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

fn bump(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        math::exp(-1.0 / (1.0 - s * s))
    }
}

fn bump_prime(s: f64) -> f64 {
    if s.abs() >= 1.0 {
        0.0
    } else {
        let w = 1.0 - s * s;
        -2.0 * s / (w * w) * math::exp(-1.0 / w)
    }
}

/// `φ(t, x) = scale · b((t − t_center)/t_radius) · b((x − x_center)/x_radius)`
/// with `b(s) = exp(−1/(1 − s²))` on `|s| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestFunction {
    pub t_center: f64,
    pub t_radius: f64,
    pub x_center: f64,
    pub x_radius: f64,
    pub scale: f64,
}

impl TestFunction {
    /// Unit-scale bump.
    pub fn new(t_center: f64, t_radius: f64, x_center: f64, x_radius: f64) -> Self {
        Self {
            t_center,
            t_radius,
            x_center,
            x_radius,
            scale: 1.0,
        }
    }

    /// True when `φ ≥ 0`.
    pub fn is_nonnegative(&self) -> bool {
        self.scale >= 0.0
    }

    /// Temporal factor `τ(t)`, carrying the scale.
    pub fn tau(&self, t: f64) -> f64 {
        self.scale * bump((t - self.t_center) / self.t_radius)
    }

    /// Spatial factor `χ(x)`.
    pub fn chi(&self, x: f64) -> f64 {
        bump((x - self.x_center) / self.x_radius)
    }

    /// `φ(t, x)`.
    pub fn value(&self, t: f64, x: f64) -> f64 {
        self.tau(t) * self.chi(x)
    }

    /// `∂_t φ`.
    pub fn dt(&self, t: f64, x: f64) -> f64 {
        self.scale * bump_prime((t - self.t_center) / self.t_radius) / self.t_radius * self.chi(x)
    }

    /// `∂_x φ`.
    pub fn dx(&self, t: f64, x: f64) -> f64 {
        self.tau(t) * bump_prime((x - self.x_center) / self.x_radius) / self.x_radius
    }

    /// Closed support `([t_lo, t_hi], [x_lo, x_hi])`.
    pub fn support(&self) -> ((f64, f64), (f64, f64)) {
        (
            (self.t_center - self.t_radius, self.t_center + self.t_radius),
            (self.x_center - self.x_radius, self.x_center + self.x_radius),
        )
    }

    fn check_inside(&self, traj: &Trajectory) -> Result<()> {
        let ((t_lo, t_hi), (x_lo, x_hi)) = self.support();
        let (first, last) = match (traj.snapshots.first(), traj.snapshots.last()) {
            (Some(a), Some(b)) => (a.time, b.time),
            _ => return Err(Error::SupportViolation),
        };
        let l = traj.grid.half_length();
        let valid = self.t_radius > 0.0 && self.x_radius > 0.0;
        if !valid || t_lo < first || t_hi > last || x_lo <= -l || x_hi >= l {
            return Err(Error::SupportViolation);
        }
        Ok(())
    }
}

/// `∫∫ (a(u) φ_t + b(u) φ_x) dx dt` over the snapshots.
///
/// The time part is summed as `Σ ½(A_n + A_{n+1})(τ(t_{n+1}) − τ(t_n))` with
/// `A_n = h Σ_j a(u_j) χ(x_j)`, and the space part as
/// `Σ_j ½(b_j + b_{j+1})(χ_{j+1} − χ_j)` integrated in time by the trapezoid
/// rule. Both reduce to telescoping sums, so a constant state gives zero.
fn space_time_pairing(
    traj: &Trajectory,
    phi: &TestFunction,
    a: impl Fn(f64) -> f64,
    b: impl Fn(f64) -> f64,
) -> f64 {
    let grid = traj.grid;
    let h = grid.spacing();
    let n = grid.n_points();
    let chi: Vec<f64> = grid.nodes().map(|x| phi.chi(x)).collect();
    let moments: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| {
            let u = s.field.values();
            let mut time_part = 0.0;
            let mut space_part = 0.0;
            for j in 0..n {
                let jn = (j + 1) % n;
                time_part += a(u[j]) * chi[j];
                space_part += 0.5 * (b(u[j]) + b(u[jn])) * (chi[jn] - chi[j]);
            }
            (time_part * h, space_part)
        })
        .collect();
    let mut total = 0.0;
    for (w, pair) in traj.snapshots.windows(2).zip(moments.windows(2)) {
        let (t0, t1) = (w[0].time, w[1].time);
        total += 0.5 * (pair[0].0 + pair[1].0) * (phi.tau(t1) - phi.tau(t0));
        total += 0.5 * (phi.tau(t0) * pair[0].1 + phi.tau(t1) * pair[1].1) * (t1 - t0);
    }
    total
}

/// `∫∫ (u φ_t + (A u²/2) φ_x) dx dt + ∫ u₀ φ(0, x) dx`.
pub fn weak_form_residual(
    traj: &Trajectory,
    a_coeff: f64,
    datum_field: &Field,
    phi: &TestFunction,
) -> Result<f64> {
    phi.check_inside(traj)?;
    if datum_field.grid() != &traj.grid {
        return Err(Error::GridMismatch);
    }
    let bulk = space_time_pairing(traj, phi, |u| u, |u| 0.5 * a_coeff * u * u);
    let t0 = traj.snapshots[0].time;
    let h = traj.grid.spacing();
    let initial: f64 = traj
        .grid
        .nodes()
        .zip(datum_field.values())
        .map(|(x, &u)| u * phi.value(t0, x))
        .sum::<f64>()
        * h;
    Ok(bulk + initial)
}

/// `R(φ) = −∫∫ (η(u) φ_t + q(u) φ_x) dx dt` for `φ ≥ 0`; entropy solutions
/// have `R(φ) ≤ 0`.
pub fn entropy_residual(traj: &Trajectory, pair: &EntropyPair, phi: &TestFunction) -> Result<f64> {
    if !phi.is_nonnegative() {
        return Err(Error::SignViolation);
    }
    phi.check_inside(traj)?;
    Ok(-space_time_pairing(
        traj,
        phi,
        |u| pair.eta(u),
        |u| pair.q(u),
    ))
}

/// `Σ |u_{j+1} − u_j|` over the periodic grid.
pub fn total_variation(f: &Field) -> f64 {
    let v = f.values();
    let n = v.len();
    (0..n).map(|j| (v[(j + 1) % n] - v[j]).abs()).sum()
}
