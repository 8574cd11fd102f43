//! Property checks on the engines: linearity of the classical response,
//! boost and phase independence of the second moment, and agreement of
//! the two Heisenberg routes.

use picture_lab_core::classical::{solve_trajectory, InitialConditions};
use picture_lab_core::heisenberg::{
    build_ladder_operators, commutator_defect, evolve_heisenberg, HeisenbergRoute,
};
use picture_lab_core::model::{Drive, FieldModel, Mode, OscillatorParams, TimeGrid};
use picture_lab_core::schrodinger::{decompose_x2, displaced_state, expectation_x2, PositionGrid};
use proptest::prelude::*;

fn mode() -> impl Strategy<Value = Mode> {
    (-1.0..1.0f64, 0.2..2.0f64, 0.0..std::f64::consts::TAU).prop_map(|(amplitude, omega, phase)| {
        Mode {
            amplitude,
            omega,
            phase,
        }
    })
}

fn field(modes: Vec<Mode>) -> FieldModel {
    FieldModel::mode_sum(modes)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn response_is_linear_in_the_drive(modes in prop::collection::vec(mode(), 1..4), c in -3.0..3.0f64) {
        let p = OscillatorParams::default();
        let grid = TimeGrid::new(0.0, 12.0, 1200).unwrap();
        let f = field(modes);
        let scaled = FieldModel { drive: f.drive.scaled(c), gamma: 0.0 };
        let a = solve_trajectory(&p, &f, InitialConditions::default(), grid).unwrap();
        let b = solve_trajectory(&p, &scaled, InitialConditions::default(), grid).unwrap();
        for (qa, qb) in a.q.iter().zip(&b.q) {
            prop_assert!((c * qa - qb).abs() < 1e-12 * (1.0 + qb.abs()));
        }
    }

    #[test]
    fn responses_superpose(m1 in mode(), m2 in mode(), gamma in 0.0..0.3f64) {
        let p = OscillatorParams::default();
        let grid = TimeGrid::new(0.0, 12.0, 1200).unwrap();
        let solve = |modes: Vec<Mode>| {
            let f = field(modes).with_damping(gamma);
            solve_trajectory(&p, &f, InitialConditions::default(), grid).unwrap().q
        };
        let (q1, q2, q12) = (solve(vec![m1]), solve(vec![m2]), solve(vec![m1, m2]));
        for k in 0..q12.len() {
            prop_assert!((q1[k] + q2[k] - q12[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn second_moment_ignores_boost_and_phase(q in -4.0..4.0f64, v in -3.0..3.0f64, phase in -10.0..10.0f64) {
        let p = OscillatorParams::default();
        let grid = PositionGrid::new(16.0, 1024).unwrap();
        let psi = displaced_state(&p, grid, q, v, phase).unwrap();
        let x2 = expectation_x2(&psi).unwrap();
        prop_assert!((x2 - 0.5 - q * q).abs() < 1e-10);
        let d = decompose_x2(&psi, q).unwrap();
        prop_assert!((d.vacuum_term - 0.5).abs() < 1e-10);
        prop_assert!((d.total() - x2).abs() < 1e-10);
    }

    #[test]
    fn vacuum_variance_follows_the_parameters(mass in 0.2..5.0f64, omega in 0.2..5.0f64, hbar in 0.1..2.0f64) {
        let p = OscillatorParams::new(mass, omega, 1.0, hbar).unwrap();
        let sigma = p.vacuum_variance().sqrt();
        let grid = PositionGrid::new(14.0 * sigma, 1024).unwrap();
        let psi = displaced_state(&p, grid, 0.0, 0.0, 0.0).unwrap();
        let x2 = expectation_x2(&psi).unwrap();
        prop_assert!((x2 / p.vacuum_variance() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn canonical_commutator_holds_below_the_cutoff(mass in 0.2..5.0f64, omega in 0.2..5.0f64, hbar in 0.1..2.0f64) {
        let p = OscillatorParams::new(mass, omega, 1.0, hbar).unwrap();
        let (x, pm) = build_ladder_operators(&p, 24).unwrap();
        prop_assert!(commutator_defect(&x, &pm, hbar, 23) < 1e-12 * (1.0 + hbar));
    }
}

#[test]
fn heisenberg_routes_agree_on_a_mode_sum() {
    let p = OscillatorParams::default();
    let f = FieldModel {
        drive: Drive::seeded_mode_sum(5, 0.5, (0.4, 1.6), 11).unwrap(),
        gamma: 0.0,
    };
    let grid = TimeGrid::new(0.0, 15.0, 3000).unwrap();
    let ics = InitialConditions::new(0.4, -0.3).unwrap();
    let closed = evolve_heisenberg(&p, &f, ics, grid, 48, HeisenbergRoute::ClosedForm).unwrap();
    let matrix = evolve_heisenberg(
        &p,
        &f,
        ics,
        grid,
        48,
        HeisenbergRoute::Matrix { record_every: 50 },
    )
    .unwrap();
    for i in matrix.sample_indices() {
        let a = closed.ground_moment_x2_at(i).unwrap();
        let b = matrix.ground_moment_x2_at(i).unwrap();
        assert!((a - b).abs() < 1e-9, "i = {i}: {a} vs {b}");
        let ma = closed.ground_mean_x_at(i).unwrap();
        let mb = matrix.ground_mean_x_at(i).unwrap();
        assert!((ma - mb).abs() < 1e-9);
    }
}
