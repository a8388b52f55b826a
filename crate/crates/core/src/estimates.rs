//! A priori energy functionals evaluated on trajectories.
//!
//! Norms of derivatives come from the spectrum (Parseval). Products of
//! two or three factors are integrated with the nodal rule, which is exact
//! for signed integrals of band-limited products of total degree ≤ N/3
//! modes; absolute values are second-order accurate.

use alloc::vec;
use alloc::vec::Vec;

use crate::burgers::EntropyPair;
use crate::grid::{Field, Norm, Spectral};
use crate::math;
use crate::params::KsParams;
use crate::solver::{StepRecord, Trajectory};
use crate::{Error, Result};

/// Pointwise-in-time functionals of one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SnapshotRow {
    pub t: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub grad_l2: f64,
    pub hess_l2: f64,
    /// `‖u‖² + β‖u_x‖²`.
    pub energy: f64,
}

/// Norms and energy of `f` (with `t = 0`).
pub fn snapshot_functionals(f: &Field, p: &KsParams) -> SnapshotRow {
    let spectral = Spectral::new(*f.grid());
    let spec = spectral.forward(f.values());
    let l2_sq = spectral.l2_squared_from_spectrum(&spec);
    let grad_sq = spectral.derivative_l2_squared(&spec, 1);
    let hess_sq = spectral.derivative_l2_squared(&spec, 2);
    SnapshotRow {
        t: 0.0,
        l2: math::sqrt(l2_sq),
        l4: f.norm(Norm::L4),
        linf: f.max_abs(),
        grad_l2: math::sqrt(grad_sq),
        hess_l2: math::sqrt(hess_sq),
        energy: l2_sq + p.beta * grad_sq,
    }
}

/// Outcome of the interpolation inequality
/// `max u² ≤ min u² + 2‖u‖‖u_x‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinfCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    /// `‖u‖_∞ β^{1/4}`.
    pub scaled_linf: f64,
}

/// Slack added to the right-hand side for rounding.
pub const LINF_SLACK: f64 = 1e-10;

/// Checks `max u² ≤ min u² + 2‖u‖₂‖u_x‖₂` on the nodes.
///
/// Nodal extrema lie inside the extrema of the trigonometric interpolant,
/// whose norms Parseval gives exactly, so the discrete check inherits the
/// continuous inequality.
pub fn linf_bound_check(f: &Field, p: &KsParams) -> LinfCheck {
    let row = snapshot_functionals(f, p);
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for &v in f.values() {
        let v2 = v * v;
        lo = lo.min(v2);
        hi = hi.max(v2);
    }
    let rhs = lo + 2.0 * row.l2 * row.grad_l2;
    LinfCheck {
        lhs: hi,
        rhs,
        ok: hi <= rhs + LINF_SLACK,
        scaled_linf: row.linf * math::sqrt(math::sqrt(p.beta)),
    }
}

/// Integral diagnostics of a single field, as the solver logs them.
pub fn field_record(f: &Field, p: &KsParams, t: f64) -> StepRecord {
    let grid = *f.grid();
    let spectral = Spectral::new(grid);
    let spec = spectral.forward(f.values());
    let mut dx = spec.clone();
    spectral.differentiate_in_place(&mut dx, 1);
    let mut dxx = spec.clone();
    spectral.differentiate_in_place(&mut dxx, 2);
    let ux = spectral.inverse_real(&dx);
    let uxx = spectral.inverse_real(&dxx);
    let h = grid.spacing();
    let mut rec = StepRecord {
        t,
        ..StepRecord::default()
    };
    for (j, &u) in f.values().iter().enumerate() {
        let (a, b) = (ux[j], uxx[j]);
        rec.mass += u * h;
        rec.l4_pow4 += u * u * u * u * h;
        rec.linf = rec.linf.max(u.abs());
        rec.ux_uxx_l1 += (a * b).abs() * h;
        rec.u_uxx_l2_sq += (u * b) * (u * b) * h;
        rec.u_ux_uxx_l1 += (u * a * b).abs() * h;
        rec.u_ux_l2_sq += (u * a) * (u * a) * h;
    }
    rec.l2_sq = spectral.l2_squared_from_spectrum(&spec);
    rec.grad_l2_sq = spectral.derivative_l2_squared(&spec, 1);
    rec.hess_l2_sq = spectral.derivative_l2_squared(&spec, 2);
    rec.energy = rec.l2_sq + p.beta * rec.grad_l2_sq;
    rec
}

/// Dense record sequence of a trajectory plus, for each snapshot, its index
/// in that sequence. Trajectories without a step log fall back to the
/// snapshots, with dissipation accumulated by the trapezoid rule.
fn dense_records(traj: &Trajectory) -> (Vec<StepRecord>, Vec<usize>) {
    let logged = !traj.log.is_empty() && traj.snapshots.iter().all(|s| s.log_index.is_some());
    if logged {
        let idx = traj
            .snapshots
            .iter()
            .map(|s| s.log_index.unwrap_or(0))
            .collect();
        return (traj.log.clone(), idx);
    }
    let p = traj.params;
    let mut recs: Vec<StepRecord> = traj
        .snapshots
        .iter()
        .map(|s| field_record(&s.field, &p, s.time))
        .collect();
    for i in 1..recs.len() {
        let (prev, cur) = (recs[i - 1], recs[i]);
        let dt = cur.t - prev.t;
        recs[i].dt = dt;
        recs[i].dissipation_eps =
            prev.dissipation_eps + dt * p.eps * (prev.grad_l2_sq + cur.grad_l2_sq);
        recs[i].dissipation_beta_eps =
            prev.dissipation_beta_eps + dt * p.beta * p.eps * (prev.hess_l2_sq + cur.hess_l2_sq);
    }
    let idx = (0..recs.len()).collect();
    (recs, idx)
}

/// Energy budget at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetRow {
    pub t: f64,
    pub energy: f64,
    /// `2ε∫‖u_x‖² + 2βε∫‖u_xx‖²` from 0 to `t`.
    pub dissipation: f64,
    /// `E(0) − E(t) − dissipation`.
    pub defect: f64,
}

/// `E(0) − E(t) − ∫₀ᵗ (2ε‖u_x‖² + 2βε‖u_xx‖²)` at every snapshot.
///
/// The dissipation integral is the one carried through the Runge–Kutta
/// stages by the solver; trajectories without a log use the trapezoid rule
/// over snapshots.
pub fn dissipation_budget(traj: &Trajectory) -> Result<Vec<BudgetRow>> {
    if !traj.params.energy_preserving_flag() {
        return Err(Error::NotEnergyPreserving);
    }
    let (recs, idx) = dense_records(traj);
    let e0 = recs.first().map_or(0.0, |r| r.energy);
    Ok(idx
        .iter()
        .map(|&k| {
            let r = &recs[k];
            BudgetRow {
                t: r.t,
                energy: r.energy,
                dissipation: r.dissipation(),
                defect: e0 - r.energy - r.dissipation(),
            }
        })
        .collect())
}

/// Exponents of `ε` that normalize the four rate quantities.
pub const RATE_EXPONENTS: [i32; 4] = [2, 5, 3, 1];

/// Names used in reports for the rate quantities.
pub const RATE_NAMES: [&str; 4] = ["ux-uxx", "uxx-l-2", "u-uxx-1", "u-ux-uxx"];

/// Cumulative rate quantities at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateRow {
    pub t: f64,
    /// `β∫‖u_x u_xx‖_{L¹}`.
    pub q_uxuxx: f64,
    /// `β²∫‖u_xx‖²`.
    pub q_uxx: f64,
    /// `β²∫‖u u_xx‖²`.
    pub q_uuxx: f64,
    /// `β∫‖u u_x u_xx‖_{L¹}`.
    pub q_uuxuxx: f64,
}

impl RateRow {
    /// The four quantities in report order.
    pub fn values(&self) -> [f64; 4] {
        [self.q_uxuxx, self.q_uxx, self.q_uuxx, self.q_uuxuxx]
    }

    /// Quantities divided by `ε², ε⁵, ε³, ε`; `None` when `ε = 0`.
    pub fn normalized(&self, eps: f64) -> Option<[f64; 4]> {
        if eps <= 0.0 {
            return None;
        }
        let v = self.values();
        let mut out = [0.0; 4];
        for i in 0..4 {
            out[i] = v[i] / math::powi(eps, RATE_EXPONENTS[i] as u32);
        }
        Some(out)
    }
}

/// Cumulative rate quantities at every snapshot, by the trapezoid rule over
/// the dense step log.
pub fn rate_quantities(traj: &Trajectory) -> Vec<RateRow> {
    let (recs, idx) = dense_records(traj);
    let beta = traj.params.beta;
    let integrand = |r: &StepRecord| {
        [
            beta * r.ux_uxx_l1,
            beta * beta * r.hess_l2_sq,
            beta * beta * r.u_uxx_l2_sq,
            beta * r.u_ux_uxx_l1,
        ]
    };
    let mut cumulative = vec![[0.0; 4]; recs.len()];
    for i in 1..recs.len() {
        let (a, b) = (integrand(&recs[i - 1]), integrand(&recs[i]));
        let dt = recs[i].t - recs[i - 1].t;
        for q in 0..4 {
            cumulative[i][q] = cumulative[i - 1][q] + 0.5 * dt * (a[q] + b[q]);
        }
    }
    idx.iter()
        .map(|&k| {
            let c = cumulative[k];
            RateRow {
                t: recs[k].t,
                q_uxuxx: c[0],
                q_uxx: c[1],
                q_uuxx: c[2],
                q_uuxuxx: c[3],
            }
        })
        .collect()
}

/// The seven controlling norms of the entropy production on `(0, T)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EntropyProduction {
    pub t_final: f64,
    /// `‖ε η′(u) u_x‖_{L²}`.
    pub eps_flux_l2: f64,
    /// `ε ∫∫ η″(u) u_x²`.
    pub eps_dissipation_l1: f64,
    /// `‖β η′(u) u_xx‖_{L²}`.
    pub beta_flux_l2: f64,
    /// `β ∫∫ |η″(u) u_x u_xx|`.
    pub beta_cross_l1: f64,
    /// `‖B β η′(u) u u_xx‖_{L²}`.
    pub b_flux_l2: f64,
    /// `|B| β ∫∫ |η″(u) u u_x u_xx|`.
    pub b_cross_l1: f64,
    /// `|C| β ∫∫ |η′(u) u_x u_xx|`.
    pub c_source_l1: f64,
}

impl EntropyProduction {
    /// Terms in report order.
    pub fn terms(&self) -> [f64; 7] {
        [
            self.eps_flux_l2,
            self.eps_dissipation_l1,
            self.beta_flux_l2,
            self.beta_cross_l1,
            self.b_flux_l2,
            self.b_cross_l1,
            self.c_source_l1,
        ]
    }
}

/// Entropy-production norms integrated in time by the trapezoid rule over
/// the snapshots (the integrands depend on `η`, so the step log cannot be
/// used).
pub fn entropy_production_terms(traj: &Trajectory, pair: &EntropyPair) -> EntropyProduction {
    let p = traj.params;
    let grid = traj.grid;
    let spectral = Spectral::new(grid);
    let h = grid.spacing();
    let per_snapshot: Vec<[f64; 7]> = traj
        .snapshots
        .iter()
        .map(|s| {
            let u = s.field.values();
            let spec = spectral.forward(u);
            let mut d1 = spec.clone();
            spectral.differentiate_in_place(&mut d1, 1);
            let mut d2 = spec;
            spectral.differentiate_in_place(&mut d2, 2);
            let ux = spectral.inverse_real(&d1);
            let uxx = spectral.inverse_real(&d2);
            let mut acc = [0.0; 7];
            for j in 0..u.len() {
                let (v, a, b) = (u[j], ux[j], uxx[j]);
                let (e1, e2) = (pair.eta_prime(v), pair.eta_second(v));
                acc[0] += (p.eps * e1 * a) * (p.eps * e1 * a);
                acc[1] += p.eps * e2 * a * a;
                acc[2] += (p.beta * e1 * b) * (p.beta * e1 * b);
                acc[3] += p.beta * (e2 * a * b).abs();
                let bf = p.b_coeff * p.beta * e1 * v * b;
                acc[4] += bf * bf;
                acc[5] += p.b_coeff.abs() * p.beta * (e2 * v * a * b).abs();
                acc[6] += p.c_coeff.abs() * p.beta * (e1 * a * b).abs();
            }
            acc.map(|x| x * h)
        })
        .collect();
    let mut total = [0.0; 7];
    for (w, v) in traj.snapshots.windows(2).zip(per_snapshot.windows(2)) {
        let dt = w[1].time - w[0].time;
        for k in 0..7 {
            total[k] += 0.5 * dt * (v[0][k] + v[1][k]);
        }
    }
    EntropyProduction {
        t_final: traj.snapshots.last().map_or(0.0, |s| s.time),
        eps_flux_l2: math::sqrt(total[0]),
        eps_dissipation_l1: total[1],
        beta_flux_l2: math::sqrt(total[2]),
        beta_cross_l1: total[3],
        b_flux_l2: math::sqrt(total[4]),
        b_cross_l1: total[5],
        c_source_l1: total[6],
    }
}

/// Cumulative integrals and auxiliary functionals at one snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CumulativeRow {
    pub t: f64,
    /// `2ε∫‖u_x‖²`.
    pub diss1: f64,
    /// `2βε∫‖u_xx‖²`.
    pub diss2: f64,
    pub rates: RateRow,
    /// `‖u‖⁴_{L⁴}/4 + ε²‖u_x‖²/2`.
    pub l4func: f64,
}

/// Everything the estimates report contains for one trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub eps: f64,
    pub beta: f64,
    pub snapshots: Vec<SnapshotRow>,
    pub cumulative: Vec<CumulativeRow>,
    pub linf_checks: Vec<LinfCheck>,
    /// `None` for non-energy-preserving runs.
    pub budget: Option<Vec<BudgetRow>>,
}

impl EstimateReport {
    /// Largest value of `pick` over the snapshots.
    pub fn max_over_time(&self, pick: impl Fn(&SnapshotRow) -> f64) -> f64 {
        self.snapshots.iter().map(pick).fold(0.0, f64::max)
    }

    /// Normalized rate constants at the final time.
    pub fn final_normalized_rates(&self) -> Option<[f64; 4]> {
        self.cumulative
            .last()
            .and_then(|c| c.rates.normalized(self.eps))
    }

    /// Largest `E(t_{n+1}) − E(t_n)` across snapshots (positive means
    /// growth).
    pub fn max_energy_increase(&self) -> f64 {
        self.snapshots
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds the full report.
pub fn estimate_report(traj: &Trajectory) -> EstimateReport {
    let p = traj.params;
    let snapshots: Vec<SnapshotRow> = traj
        .snapshots
        .iter()
        .map(|s| SnapshotRow {
            t: s.time,
            ..snapshot_functionals(&s.field, &p)
        })
        .collect();
    let linf_checks = traj
        .snapshots
        .iter()
        .map(|s| linf_bound_check(&s.field, &p))
        .collect();
    let (recs, idx) = dense_records(traj);
    let rates = rate_quantities(traj);
    let cumulative = idx
        .iter()
        .zip(&rates)
        .zip(&snapshots)
        .map(|((&k, r), s)| CumulativeRow {
            t: s.t,
            diss1: recs[k].dissipation_eps,
            diss2: recs[k].dissipation_beta_eps,
            rates: *r,
            l4func: recs[k].l4_pow4 / 4.0 + p.eps * p.eps * s.grad_l2 * s.grad_l2 / 2.0,
        })
        .collect();
    EstimateReport {
        eps: p.eps,
        beta: p.beta,
        snapshots,
        cumulative,
        linf_checks,
        budget: dissipation_budget(traj).ok(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::burgers::{make_entropy_pair, EntropyKind};
    use crate::grid::Grid;
    use core::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(PI, 64).unwrap()
    }

    #[test]
    fn zero_field_functionals() {
        let p = KsParams::energy_preserving(1.0, 0.01, 0.1).unwrap();
        let row = snapshot_functionals(&Field::zeros(grid()), &p);
        assert_eq!(row, SnapshotRow::default());
        let c = linf_bound_check(&Field::zeros(grid()), &p);
        assert!(c.ok && c.lhs == 0.0 && c.rhs == 0.0);
    }

    #[test]
    fn sine_functionals() {
        let p = KsParams::energy_preserving(1.0, 0.01, 0.1).unwrap();
        let f = Field::from_fn(grid(), f64::sin);
        let row = snapshot_functionals(&f, &p);
        assert!((row.energy - PI * 1.01).abs() < 1e-10);
        let n = 64.0;
        assert!((row.linf - 1.0).abs() <= 1.0 / (n * n));
        let c = linf_bound_check(&f, &p);
        assert!(c.ok);
        assert!((c.rhs - 2.0 * PI).abs() < 1e-10);
    }

    fn sine_traj(times: &[f64]) -> Trajectory {
        let p = KsParams::energy_preserving(1.0, 1e-4, 0.1).unwrap();
        Trajectory::from_fn(grid(), p, times, |t, x| (-0.1 * t).exp() * x.sin())
    }

    #[test]
    fn single_snapshot_has_zero_integrals() {
        let traj = sine_traj(&[0.0]);
        assert_eq!(rate_quantities(&traj), vec![RateRow::default()]);
    }

    #[test]
    fn zero_trajectory_gives_zero_reports() {
        let p = KsParams::energy_preserving(1.0, 1e-4, 0.1).unwrap();
        let traj = Trajectory::from_fn(grid(), p, &[0.0, 0.5, 1.0], |_, _| 0.0);
        for r in rate_quantities(&traj) {
            assert_eq!(r.values(), [0.0; 4]);
        }
        for b in dissipation_budget(&traj).unwrap() {
            assert_eq!(b.defect, 0.0);
        }
        let pair = make_entropy_pair(EntropyKind::Square, 1.0).unwrap();
        assert_eq!(entropy_production_terms(&traj, &pair).terms(), [0.0; 7]);
    }

    #[test]
    fn constant_in_space_has_no_derivative_terms() {
        let p = KsParams::energy_preserving(1.0, 1e-4, 0.1).unwrap();
        let traj = Trajectory::from_fn(grid(), p, &[0.0, 0.5, 1.0], |t, _| 1.0 + t);
        let pair = make_entropy_pair(EntropyKind::Square, 1.0).unwrap();
        assert!(entropy_production_terms(&traj, &pair)
            .terms()
            .iter()
            .all(|&v| v.abs() < 1e-20));
    }

    #[test]
    fn budget_refuses_nonconservative() {
        let p = KsParams::new(1.0, 1.0, 1.0, 0.0, 1e-4, 0.1).unwrap();
        let traj = Trajectory::from_fn(grid(), p, &[0.0, 1.0], |_, x| x.sin());
        assert_eq!(dissipation_budget(&traj), Err(Error::NotEnergyPreserving));
    }

    #[test]
    fn cumulative_integrals_are_monotone() {
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let report = estimate_report(&sine_traj(&times));
        for w in report.cumulative.windows(2) {
            assert!(w[1].diss1 >= w[0].diss1 && w[1].diss2 >= w[0].diss2);
            for q in 0..4 {
                assert!(w[1].rates.values()[q] >= w[0].rates.values()[q]);
            }
        }
        // 2ε∫‖u_x‖² for u = e^{−εt} sin x over [0, 1] is π(1 − e^{−2ε})
        let exact = PI * (1.0 - (-0.2f64).exp());
        assert!((report.cumulative.last().unwrap().diss1 - exact).abs() < 1e-3);
    }
}
