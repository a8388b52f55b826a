use kslab_core::burgers::{burgers_solve_field, godunov_flux, make_entropy_pair, EntropyKind};
use kslab_core::estimates::linf_bound_check;
use kslab_core::grid::{Field, Grid};
use kslab_core::limit::{lp_window_error, Window};
use kslab_core::params::{energy_preserving_coefficients, verify_constraint_system, KsParams};
use kslab_core::solver::{ks_rhs, Trajectory};
use proptest::prelude::*;

fn trig_poly(grid: Grid, coeffs: &[(f64, f64)]) -> Field {
    Field::from_fn(grid, |x| {
        coeffs
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| {
                let k = (k + 1) as f64;
                a * (k * x).cos() + b * (k * x).sin()
            })
            .sum()
    })
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..6)
}

proptest! {
    #[test]
    fn constraint_holds_for_any_a(a in -1e3..1e3f64) {
        let (b, c) = energy_preserving_coefficients(a);
        let p = KsParams::new(a, b, c, 0.0, 1e-4, 0.1).unwrap();
        prop_assert!(verify_constraint_system(&p));
    }

    #[test]
    fn godunov_flux_is_consistent(c in -5.0..5.0f64, a in 0.01..5.0f64) {
        prop_assert_eq!(godunov_flux(c, c, a), 0.5 * a * c * c);
    }

    #[test]
    fn godunov_flux_is_monotone(
        ul in -3.0..3.0f64, ur in -3.0..3.0f64, d in 0.0..1.0f64, a in 0.01..5.0f64
    ) {
        prop_assert!(godunov_flux(ul + d, ur, a) >= godunov_flux(ul, ur, a));
        prop_assert!(godunov_flux(ul, ur + d, a) <= godunov_flux(ul, ur, a));
    }

    #[test]
    fn interpolation_inequality_holds(cs in coeffs(), shift in -2.0..2.0f64) {
        let grid = Grid::new(std::f64::consts::PI, 64).unwrap();
        let f = trig_poly(grid, &cs).map(|v| v + shift);
        let p = KsParams::energy_preserving(1.0, 1e-3, 0.1).unwrap();
        prop_assert!(linf_bound_check(&f, &p).ok);
    }

    #[test]
    fn rhs_conserves_mass(cs in coeffs(), a in -2.0..2.0f64, eps in 0.0..0.5f64, beta in 0.0..0.1f64) {
        let grid = Grid::new(std::f64::consts::PI, 64).unwrap();
        let f = trig_poly(grid, &cs);
        let (b, c) = energy_preserving_coefficients(a);
        let p = KsParams::new(a, b, c, 0.3, beta, eps).unwrap();
        prop_assert!(ks_rhs(&f, &p).unwrap().integral().abs() < 1e-12);
    }

    #[test]
    fn window_error_triangle_inequality(
        x in coeffs(), y in coeffs(), z in coeffs(), p in 1.0..3.99f64
    ) {
        let grid = Grid::new(4.0, 64).unwrap();
        let params = KsParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let times = [0.0, 0.25, 0.5, 0.75, 1.0];
        let make = |cs: Vec<(f64, f64)>| {
            Trajectory::from_fn(grid, params, &times, move |t, x| {
                cs.iter().enumerate().map(|(k, &(a, b))| {
                    let k = (k + 1) as f64;
                    a * (k * x + t).cos() + b * (k * x - t).sin()
                }).sum()
            })
        };
        let (f, g, h) = (make(x), make(y), make(z));
        let w = Window { t_start: 0.25, t_end: 1.0, x_start: -2.0, x_end: 3.0 };
        let fh = lp_window_error(&f, &h, &w, p).unwrap();
        let fg = lp_window_error(&f, &g, &w, p).unwrap();
        let gh = lp_window_error(&g, &h, &w, p).unwrap();
        prop_assert!(fh <= fg + gh + 1e-12);
    }
}

#[test]
fn entropy_flux_derivative_matches_definition() {
    let kinds = [
        EntropyKind::Square,
        EntropyKind::KruzhkovSmoothed {
            k: 0.4,
            delta: 0.05,
        },
        EntropyKind::CompactBump {
            center: 0.3,
            radius: 0.5,
        },
    ];
    for kind in kinds {
        let pair = make_entropy_pair(kind, 1.3).unwrap();
        assert_eq!(pair.q(0.0), 0.0);
        let h = 1e-5;
        for i in 0..1000 {
            let u = -2.0 + 4.0 * (i as f64 + 0.5) / 1000.0;
            let fd = (pair.q(u + h) - pair.q(u - h)) / (2.0 * h);
            let tol = 1e-6 * (1.0 + pair.q_prime(u).abs());
            assert!((fd - pair.q_prime(u)).abs() < tol, "{kind:?} at {u}: {fd}");
        }
    }
}

#[test]
fn godunov_is_an_l1_contraction() {
    let grid = Grid::new(4.0, 256).unwrap();
    let base = |x: f64| (-(x * x)).exp() + 0.5 * (-(x - 1.0) * (x - 1.0) * 4.0).exp();
    for (shift, amp) in [(0.1, 1.0), (0.3, 0.7), (0.05, 1.4)] {
        let u = Field::from_fn(grid, |x| amp * base(x));
        let v = Field::from_fn(grid, |x| amp * base(x) + shift * (-(x * x) / 2.0).exp());
        let times: Vec<f64> = (1..=10).map(|i| i as f64 * 0.2).collect();
        let tu = burgers_solve_field(&u, 1.0, 2.0, &times).unwrap();
        let tv = burgers_solve_field(&v, 1.0, 2.0, &times).unwrap();
        let dist: Vec<f64> = tu
            .snapshots
            .iter()
            .zip(&tv.snapshots)
            .map(|(a, b)| {
                a.field
                    .values()
                    .iter()
                    .zip(b.field.values())
                    .map(|(x, y)| (x - y).abs())
                    .sum::<f64>()
                    * grid.spacing()
            })
            .collect();
        for w in dist.windows(2) {
            assert!(w[1] <= w[0] + 1e-10, "{dist:?}");
        }
    }
}
