use kslab_core::datum::{mollify, DatumKind, InitialDatum};
use kslab_core::grid::{norm, Field, Grid, Norm};
use kslab_core::params::KsParams;
use kslab_core::solver::{simulate, KsStepper, SolverConfig, DEFAULT_DEALIAS_FRACTION};

fn gaussian(amplitude: f64, width: f64, moll: f64) -> InitialDatum {
    InitialDatum::new(
        DatumKind::Gaussian {
            amplitude,
            center: 0.0,
            width,
        },
        moll,
    )
}

fn fixed_step_run(grid: Grid, p: KsParams, datum: &InitialDatum, t: f64, steps: usize) -> Field {
    let mut stepper = KsStepper::new(grid, p, DEFAULT_DEALIAS_FRACTION);
    let mut state = stepper.project(&mollify(datum, &grid).unwrap()).unwrap();
    let dt = t / steps as f64;
    for _ in 0..steps {
        stepper.step(&mut state, dt).unwrap();
    }
    stepper.to_field(&state)
}

#[test]
fn temporal_order_is_four() {
    let grid = Grid::new(10.0, 256).unwrap();
    let p = KsParams::energy_preserving(1.0, 1e-3, 0.1).unwrap();
    let datum = gaussian(1.0, 1.0, 0.2);
    let reference = fixed_step_run(grid, p, &datum, 0.5, 3200);
    let errors: Vec<f64> = [25, 50, 100, 200]
        .iter()
        .map(|&n| {
            let u = fixed_step_run(grid, p, &datum, 0.5, n);
            norm(&u.axpby(1.0, &reference, -1.0).unwrap(), Norm::L2)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        eprintln!("errors {errors:?} order {order}");
        assert!(order >= 3.5, "{errors:?}");
    }
}

#[test]
fn spatial_convergence_is_spectral() {
    let p = KsParams::energy_preserving(1.0, 1e-4, 0.1).unwrap();
    let datum = gaussian(0.8, 1.0, 0.2);
    let runs: Vec<Field> = [64usize, 128, 256, 512]
        .iter()
        .map(|&n| fixed_step_run(Grid::new(10.0, n).unwrap(), p, &datum, 0.5, 500))
        .collect();
    // compare on the coarsest nodes
    let coarse = |f: &Field| -> Vec<f64> {
        let stride = f.grid().n_points() / 64;
        f.values().iter().step_by(stride).copied().collect()
    };
    let diffs: Vec<f64> = runs
        .windows(2)
        .map(|w| {
            let (a, b) = (coarse(&w[0]), coarse(&w[1]));
            a.iter()
                .zip(&b)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    eprintln!("{diffs:?}");
    for w in diffs.windows(2) {
        assert!(w[1] < 1e-11 || w[1] * 10.0 <= w[0], "{diffs:?}");
    }
}

#[test]
fn energy_identity_and_mass() {
    let eps: f64 = 0.05;
    let beta = eps * eps * eps * eps;
    let grid = Grid::new(16.0, 1024).unwrap();
    let datum = gaussian(1.0, 1.0, eps.max(2.0 * grid.spacing()));
    let cfg = SolverConfig::uniform(1.0, 10).unwrap();
    for e in [eps, 0.0] {
        let p = KsParams::energy_preserving(1.0, beta, e).unwrap();
        let traj = simulate(&datum, &p, &cfg, &grid).unwrap();
        let first = traj.log.first().unwrap();
        let last = traj.log.last().unwrap();
        let defect = first.energy - last.energy - last.dissipation();
        eprintln!(
            "eps {e}: steps {} defect {defect:e} mass {:e}",
            traj.step_count,
            last.mass - first.mass
        );
        let tol = if e == 0.0 { 1e-8 } else { 1e-5 };
        assert!(defect.abs() < tol);
        assert!((last.mass - first.mass).abs() < 1e-8);
    }
}
