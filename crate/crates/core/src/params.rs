//! Coefficient tuples `(A, B, C, D, β, ε)`, the energy-preserving
//! constraint, the ε–β coupling, and the root analysis of
//! `g(X) = X^{2n} + 3X − 3α` behind the family `A = (C + α)^{2n}`.
//!
//! The energy balance obtained by testing the equation against `u − βu_xx`
//! contains the cubic terms `−2β(A − B + C)∫u u_x u_xx` and
//! `β²(B + 2C)∫u_x u_xx²`. Both vanish exactly when
//!
//! ```text
//! A − B + C = 0,    B + 2C = 0,    D = 0,
//! ```
//!
//! i.e. `(B, C) = (2A/3, −A/3)`.

use alloc::format;

use crate::math;
use crate::{Error, Result};

/// Residual tolerance of the constraint system.
pub const CONSTRAINT_TOLERANCE: f64 = 1e-12;

/// Coefficients of the regularized equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsParams {
    /// Advection coefficient `A`.
    pub a_coeff: f64,
    /// Coefficient `B` of `−Bβ(u u_xx)_x`.
    pub b_coeff: f64,
    /// Coefficient `C` of `−Cβ u_x u_xx`.
    pub c_coeff: f64,
    /// Coefficient `D` of `−Dβ(u u_x)_x`.
    pub d_coeff: f64,
    /// Dispersion `β ≥ 0`.
    pub beta: f64,
    /// Diffusion `ε ≥ 0`.
    pub eps: f64,
}

impl KsParams {
    /// Validated constructor.
    pub fn new(a: f64, b: f64, c: f64, d: f64, beta: f64, eps: f64) -> Result<Self> {
        if ![a, b, c, d, beta, eps].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter(
                "coefficients must be finite".into(),
            ));
        }
        if beta < 0.0 || eps < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "beta and eps must be nonnegative (beta = {beta}, eps = {eps})"
            )));
        }
        Ok(Self {
            a_coeff: a,
            b_coeff: b,
            c_coeff: c,
            d_coeff: d,
            beta,
            eps,
        })
    }

    /// Energy-preserving tuple `(A, 2A/3, −A/3, 0, β, ε)`.
    pub fn energy_preserving(a: f64, beta: f64, eps: f64) -> Result<Self> {
        let (b, c) = energy_preserving_coefficients(a);
        Self::new(a, b, c, 0.0, beta, eps)
    }

    /// Whether the tuple satisfies the constraint system.
    pub fn energy_preserving_flag(&self) -> bool {
        verify_constraint_system(self)
    }

    /// Residuals `(A − B + C, B + 2C)`.
    pub fn constraint_residuals(&self) -> (f64, f64) {
        (
            self.a_coeff - self.b_coeff + self.c_coeff,
            self.b_coeff + 2.0 * self.c_coeff,
        )
    }
}

/// `(B, C) = (2A/3, −A/3)`.
pub fn energy_preserving_coefficients(a_coeff: f64) -> (f64, f64) {
    (2.0 * a_coeff / 3.0, -a_coeff / 3.0)
}

/// True iff `|A − B + C| < 1e−12`, `|B + 2C| < 1e−12` and `D = 0`.
pub fn verify_constraint_system(p: &KsParams) -> bool {
    let (r1, r2) = p.constraint_residuals();
    r1.abs() < CONSTRAINT_TOLERANCE && r2.abs() < CONSTRAINT_TOLERANCE && p.d_coeff == 0.0
}

/// `β = c·ε⁴`.
pub fn coupling_beta(eps: f64, c_coupling: f64) -> Result<f64> {
    if !(eps > 0.0 && c_coupling > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "coupling needs eps > 0 and c > 0 (eps = {eps}, c = {c_coupling})"
        )));
    }
    Ok(c_coupling * math::powi(eps, 4))
}

/// `A = (C + α)^{2n}` family: exponent `n ≥ 1` and shift `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixProblem {
    /// `n ≥ 1`.
    pub n_exponent: u32,
    /// `α`.
    pub alpha: f64,
}

impl AppendixProblem {
    /// Validated constructor.
    pub fn new(n_exponent: u32, alpha: f64) -> Result<Self> {
        if n_exponent == 0 || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need n >= 1 and finite alpha (n = {n_exponent}, alpha = {alpha})"
            )));
        }
        Ok(Self { n_exponent, alpha })
    }

    /// `X₀ = −(3/(2n))^{1/(2n−1)}`, the minimizer of `g`.
    pub fn x0(&self) -> f64 {
        let n = self.n_exponent as f64;
        -math::powf(3.0 / (2.0 * n), 1.0 / (2.0 * n - 1.0))
    }

    /// Smallest `α` for which `g(X₀) ≤ 0`:
    /// `3^{1/(2n−1)}(1/2n)^{2n/(2n−1)} − (3/2n)^{1/(2n−1)}`.
    pub fn alpha_threshold(&self) -> f64 {
        let n = self.n_exponent as f64;
        let m = 2.0 * n - 1.0;
        math::powf(3.0, 1.0 / m) * math::powf(1.0 / (2.0 * n), 2.0 * n / m)
            - math::powf(3.0 / (2.0 * n), 1.0 / m)
    }
}

/// `g(X) = X^{2n} + 3X − 3α`.
pub fn appendix_g(x: f64, prob: &AppendixProblem) -> f64 {
    math::powi(x, 2 * prob.n_exponent) + 3.0 * x - 3.0 * prob.alpha
}

/// `g(X₀) ≤ 0`. Since `g → +∞` at both ends and `g` is increasing on
/// `(X₀, ∞)` (and decreasing before), this certifies exactly two real zeros
/// `X₁ ≤ X₀ ≤ X₂`.
pub fn two_roots_certificate(prob: &AppendixProblem) -> bool {
    appendix_g(prob.x0(), prob) <= 0.0
}

/// Roots of `g` and the coefficients they induce.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppendixRoots {
    /// Left root `X₁ ≤ X₀`.
    pub x1: f64,
    /// Right root `X₂ ≥ X₀`.
    pub x2: f64,
    /// `A = X₁^{2n}`.
    pub a_from_x1: f64,
    /// `A = X₂^{2n}`.
    pub a_from_x2: f64,
    /// `C = X₁ − α`.
    pub c_from_x1: f64,
    /// `C = X₂ − α`.
    pub c_from_x2: f64,
    /// Set when `X₂ = 0` (only at `α = 0`); that root gives `C = 0`, which
    /// the coefficient family excludes.
    pub boundary_root: bool,
}

impl AppendixRoots {
    /// Admissible `(A, C)` pairs; roots with `C = 0` are dropped.
    pub fn admissible_coefficients(&self) -> impl Iterator<Item = (f64, f64)> {
        [
            (self.a_from_x1, self.c_from_x1),
            (self.a_from_x2, self.c_from_x2),
        ]
        .into_iter()
        .filter(|&(_, c)| c != 0.0)
    }
}

/// Bracket expansion cap.
pub const MAX_BRACKET_EXPANSIONS: usize = 1000;
/// Bisection iteration cap.
pub const MAX_BISECTIONS: usize = 200;

/// Both zeros of `g`, by bisection on `[X_left, X₀]` and `[X₀, X_right]`
/// with geometrically expanded outer ends.
pub fn appendix_roots(prob: &AppendixProblem) -> Result<AppendixRoots> {
    if !two_roots_certificate(prob) {
        return Err(Error::CertificateFailed);
    }
    let x0 = prob.x0();
    let g = |x: f64| appendix_g(x, prob);
    let tol = 1e-12 * (1.0 + (3.0 * prob.alpha).abs());

    let x1 = if g(x0) == 0.0 {
        x0
    } else {
        let left = expand(x0, -1.0, &g)?;
        bisect(left, x0, &g, tol)
    };
    let x2 = if g(x0) == 0.0 {
        x0
    } else if g(0.0) == 0.0 {
        // exact root at the origin when α = 0
        0.0
    } else {
        let right = expand(x0, 1.0, &g)?;
        bisect(x0, right, &g, tol)
    };
    let two_n = 2 * prob.n_exponent;
    Ok(AppendixRoots {
        x1,
        x2,
        a_from_x1: math::powi(x1, two_n),
        a_from_x2: math::powi(x2, two_n),
        c_from_x1: x1 - prob.alpha,
        c_from_x2: x2 - prob.alpha,
        boundary_root: x2 == 0.0,
    })
}

fn expand(x0: f64, direction: f64, g: &impl Fn(f64) -> f64) -> Result<f64> {
    let mut step = 1.0;
    for _ in 0..MAX_BRACKET_EXPANSIONS {
        let x = x0 + direction * step;
        if g(x) > 0.0 {
            return Ok(x);
        }
        step *= 2.0;
        if !step.is_finite() {
            break;
        }
    }
    Err(Error::BracketExpansion(MAX_BRACKET_EXPANSIONS))
}

/// Bisection on a bracket with `g(lo)` and `g(hi)` of opposite sign (or zero).
fn bisect(mut lo: f64, mut hi: f64, g: &impl Fn(f64) -> f64, tol: f64) -> f64 {
    let mut g_lo = g(lo);
    if g_lo == 0.0 {
        return lo;
    }
    if g(hi) == 0.0 {
        return hi;
    }
    let mut best = (lo, g_lo.abs());
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let g_mid = g(mid);
        if g_mid.abs() < best.1 {
            best = (mid, g_mid.abs());
        }
        if g_mid == 0.0 || (hi - lo).abs() <= f64::EPSILON * mid.abs().max(1.0) {
            break;
        }
        if (g_mid < 0.0) == (g_lo < 0.0) {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
        if best.1 < tol * 1e-3 {
            break;
        }
    }
    best.0
}

/// Whether `A = C^{2n+1}` admits a real `C ≠ 0` under the constraint system.
///
/// The constraint forces `A = −3C`, so `C^{2n+1} + 3C = C(C^{2n} + 3) = 0`,
/// and `C^{2n} + 3 ≥ 3` has no real zero. Always false.
pub fn odd_exponent_has_real_solution(_n: u32) -> bool {
    false
}

/// Lower bound of `C^{2n} + 3` over the reals.
pub const ODD_EXPONENT_LOWER_BOUND: f64 = 3.0;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn energy_preserving_examples() {
        assert_eq!(energy_preserving_coefficients(1.0), (2.0 / 3.0, -1.0 / 3.0));
        assert_eq!(energy_preserving_coefficients(0.0), (0.0, -0.0));
        assert_eq!(energy_preserving_coefficients(9.0), (6.0, -3.0));
    }

    #[test]
    fn constraint_examples() {
        let p = KsParams::new(1.0, 2.0 / 3.0, -1.0 / 3.0, 0.0, 0.0, 0.0).unwrap();
        assert!(verify_constraint_system(&p));
        let p = KsParams::new(1.0, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(!verify_constraint_system(&p));
        let p = KsParams::new(9.0, 6.0, -3.0, 0.0, 0.0, 0.0).unwrap();
        assert!(verify_constraint_system(&p));
        let p = KsParams::new(9.0, 6.0, -3.0, 0.5, 0.0, 0.0).unwrap();
        assert!(!verify_constraint_system(&p));
    }

    #[test]
    fn params_validation() {
        assert!(KsParams::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0).is_err());
        assert!(KsParams::new(1.0, 0.0, 0.0, 0.0, 0.0, -0.1).is_err());
        assert!(KsParams::new(f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn coupling_examples() {
        assert!((coupling_beta(0.1, 1.0).unwrap() - 1e-4).abs() < 1e-18);
        assert!((coupling_beta(0.05, 1.0).unwrap() / 6.25e-6 - 1.0).abs() < 1e-15);
        for eps in [0.3, 0.1, 0.05, 0.0123] {
            let b = coupling_beta(eps, 1.7).unwrap();
            let b_half = coupling_beta(eps / 2.0, 1.7).unwrap();
            assert!((b / 16.0 / b_half - 1.0).abs() < 1e-15);
        }
        assert!(coupling_beta(0.0, 1.0).is_err());
        assert!(coupling_beta(0.1, 0.0).is_err());
    }

    #[test]
    fn g_examples() {
        let p = AppendixProblem::new(1, 0.0).unwrap();
        assert_eq!(appendix_g(0.0, &p), 0.0);
        assert_eq!(appendix_g(-3.0, &p), 0.0);
        let p = AppendixProblem::new(2, 1.0).unwrap();
        assert_eq!(appendix_g(1.0, &p), 1.0);
        assert!(AppendixProblem::new(0, 1.0).is_err());
    }

    #[test]
    fn certificate_examples() {
        let p = AppendixProblem::new(1, 0.0).unwrap();
        assert_eq!(p.x0(), -1.5);
        assert_eq!(appendix_g(p.x0(), &p), -2.25);
        assert!(two_roots_certificate(&p));
        let p = AppendixProblem::new(1, 1.0).unwrap();
        assert_eq!(appendix_g(p.x0(), &p), -5.25);
        assert!(two_roots_certificate(&p));
        let p = AppendixProblem::new(1, -1.0).unwrap();
        assert_eq!(appendix_g(p.x0(), &p), 0.75);
        assert!(!two_roots_certificate(&p));
        assert_eq!(appendix_roots(&p), Err(Error::CertificateFailed));
    }

    #[test]
    fn threshold_for_n1() {
        let p = AppendixProblem::new(1, 0.0).unwrap();
        assert!((p.alpha_threshold() + 0.75).abs() < 1e-15);
    }

    #[test]
    fn roots_examples() {
        let r = appendix_roots(&AppendixProblem::new(1, 0.0).unwrap()).unwrap();
        assert!((r.x1 + 3.0).abs() < 1e-12);
        assert_eq!(r.x2, 0.0);
        assert!(r.boundary_root);
        let admissible: alloc::vec::Vec<_> = r.admissible_coefficients().collect();
        assert_eq!(admissible.len(), 1);
        assert!((admissible[0].0 - 9.0).abs() < 1e-10);
        assert!((admissible[0].1 + 3.0).abs() < 1e-12);

        let r = appendix_roots(&AppendixProblem::new(1, 1.0).unwrap()).unwrap();
        let s21 = 21f64.sqrt();
        assert!((r.x1 - (-3.0 - s21) / 2.0).abs() < 1e-10);
        assert!((r.x2 - (-3.0 + s21) / 2.0).abs() < 1e-10);
        assert!(!r.boundary_root);

        let r = appendix_roots(&AppendixProblem::new(2, 0.0).unwrap()).unwrap();
        assert!((r.x1 + 3f64.powf(1.0 / 3.0)).abs() < 1e-10);
        assert_eq!(r.x2, 0.0);
    }

    #[test]
    fn roots_are_small_residual() {
        for n in 1..=4 {
            for alpha in [0.0, 0.3, 1.0, 2.5, -0.2] {
                let p = AppendixProblem::new(n, alpha).unwrap();
                if !two_roots_certificate(&p) {
                    continue;
                }
                let r = appendix_roots(&p).unwrap();
                let tol = 1e-12 * (1.0 + (3.0 * alpha).abs());
                assert!(appendix_g(r.x1, &p).abs() < tol, "n={n} alpha={alpha}");
                assert!(appendix_g(r.x2, &p).abs() < tol, "n={n} alpha={alpha}");
                assert!(r.x1 <= p.x0() && p.x0() <= r.x2);
            }
        }
    }
}
