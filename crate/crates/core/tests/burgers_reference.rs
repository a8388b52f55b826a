use kslab_core::burgers::{
    burgers_solve, entropy_residual, make_entropy_pair, riemann_exact, weak_form_residual,
    EntropyKind, TestFunction,
};
use kslab_core::datum::{DatumKind, InitialDatum};
use kslab_core::grid::Grid;
use kslab_core::params::KsParams;
use kslab_core::solver::Trajectory;

fn step(u_left: f64, u_right: f64, width: f64) -> InitialDatum {
    InitialDatum::new(
        DatumKind::RiemannStep {
            u_left,
            u_right,
            position: 0.0,
            extent: 4.0,
            transition_width: 0.0,
        },
        width,
    )
}

fn times() -> Vec<f64> {
    (0..=20).map(|i| i as f64 * 0.05).collect()
}

fn l1_to_exact(traj: &Trajectory, u_l: f64, u_r: f64) -> f64 {
    let last = traj.snapshots.last().unwrap();
    let h = traj.grid.spacing();
    traj.grid
        .nodes()
        .zip(last.field.values())
        .filter(|(x, _)| x.abs() <= 2.0)
        .map(|(x, &u)| (u - riemann_exact(u_l, u_r, 1.0, x / last.time).unwrap()).abs() * h)
        .sum()
}

#[test]
fn godunov_matches_riemann_within_envelopes() {
    let grid = Grid::new(8.0, 4096).unwrap();
    let h = grid.spacing();
    let w = 2.0 * h;
    let shock = burgers_solve(&step(1.0, 0.0, w), 1.0, &grid, 1.0, &times()).unwrap();
    assert!(l1_to_exact(&shock, 1.0, 0.0) < 3.0 * h.sqrt() + w);
    let fan = burgers_solve(&step(0.0, 1.0, w), 1.0, &grid, 1.0, &times()).unwrap();
    assert!(l1_to_exact(&fan, 0.0, 1.0) < 5.0 * h * h.ln().abs() + w);
}

#[test]
fn godunov_shock_is_weak_and_entropic() {
    let grid = Grid::new(8.0, 2048).unwrap();
    let h = grid.spacing();
    let traj = burgers_solve(&step(1.0, 0.0, 2.0 * h), 1.0, &grid, 1.0, &times()).unwrap();
    let u0 = traj.snapshots[0].field.clone();
    let pairs = [
        make_entropy_pair(EntropyKind::Square, 1.0).unwrap(),
        make_entropy_pair(
            EntropyKind::KruzhkovSmoothed {
                k: 0.5,
                delta: 0.01,
            },
            1.0,
        )
        .unwrap(),
        make_entropy_pair(
            EntropyKind::CompactBump {
                center: 0.5,
                radius: 0.6,
            },
            1.0,
        )
        .unwrap(),
    ];
    let phis = [
        TestFunction::new(0.5, 0.3, 0.25, 0.5),
        TestFunction::new(0.6, 0.35, 0.3, 1.0),
        TestFunction::new(0.4, 0.25, 0.2, 0.3),
        TestFunction::new(0.7, 0.25, 0.35, 0.6),
        TestFunction::new(0.5, 0.45, 0.0, 1.5),
    ];
    for phi in &phis {
        assert!(weak_form_residual(&traj, 1.0, &u0, phi).unwrap().abs() < 10.0 * h);
        for pair in &pairs {
            assert!(entropy_residual(&traj, pair, phi).unwrap() <= 1e-8 + 10.0 * h);
        }
    }
}

#[test]
fn planted_rarefaction_shock_is_detected() {
    let grid = Grid::new(4.0, 1024).unwrap();
    let p = KsParams::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
    let traj = Trajectory::from_fn(
        grid,
        p,
        &times(),
        |t, x| if x < 0.5 * t { 0.0 } else { 1.0 },
    );
    let pair = make_entropy_pair(EntropyKind::Square, 1.0).unwrap();
    let phi = TestFunction::new(0.5, 0.3, 0.25, 0.5);
    let r = entropy_residual(&traj, &pair, &phi).unwrap();
    assert!(r > 0.0, "{r}");
    // the same jump with the admissible orientation dissipates
    let good = Trajectory::from_fn(
        grid,
        p,
        &times(),
        |t, x| if x < 0.5 * t { 1.0 } else { 0.0 },
    );
    assert!(entropy_residual(&good, &pair, &phi).unwrap() < 0.0);
}
