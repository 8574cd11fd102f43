//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Runs are sized for interactive use (512 grid points, the coarsest step
//! the split-step engine accepts), so the equivalence numbers are looser
//! than the CLI's.

use picture_lab_core::classical::solve_trajectory;
use picture_lab_core::lab::{run_scenario, Scenario};
use picture_lab_core::model::{FieldModel, OscillatorParams};
use picture_lab_core::schrodinger::{
    displaced_state, expectation_x2, PositionGrid, MAX_PHASE_PER_STEP,
};
use wasm_bindgen::prelude::*;

const MIN_STEPS_PER_PERIOD: usize = 2000;
const POINTS: usize = 512;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

/// Time series and final wave packet from one driven run.
#[wasm_bindgen]
pub struct Simulation {
    t: Vec<f64>,
    q_c: Vec<f64>,
    x2_schrodinger: Vec<f64>,
    x2_heisenberg: Vec<f64>,
    x: Vec<f64>,
    density: Vec<f64>,
    sup_discrepancy: f64,
    equivalent: bool,
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(getter)]
    pub fn t(&self) -> Vec<f64> {
        self.t.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn q_c(&self) -> Vec<f64> {
        self.q_c.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn x2_schrodinger(&self) -> Vec<f64> {
        self.x2_schrodinger.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn x2_heisenberg(&self) -> Vec<f64> {
        self.x2_heisenberg.clone()
    }
    /// Grid positions for `density`.
    #[wasm_bindgen(getter)]
    pub fn x(&self) -> Vec<f64> {
        self.x.clone()
    }
    /// |ψ|² at the final time.
    #[wasm_bindgen(getter)]
    pub fn density(&self) -> Vec<f64> {
        self.density.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn sup_discrepancy(&self) -> f64 {
        self.sup_discrepancy
    }
    #[wasm_bindgen(getter)]
    pub fn equivalent(&self) -> bool {
        self.equivalent
    }
}

/// Drives the ground state with `E(t) = amplitude·cos(frequency·t)` plus
/// damping `gamma`, in natural units, for `periods` oscillator periods.
#[wasm_bindgen]
pub fn simulate(
    amplitude: f64,
    frequency: f64,
    gamma: f64,
    periods: f64,
) -> Result<Simulation, JsError> {
    run_driven(amplitude, frequency, gamma, periods).map_err(js_err)
}

fn run_driven(
    amplitude: f64,
    frequency: f64,
    gamma: f64,
    periods: f64,
) -> picture_lab_core::Result<Simulation> {
    let field = FieldModel::monochromatic(amplitude, frequency, 0.0).with_damping(gamma);
    let probe = Scenario::natural("web", field.clone(), periods, MIN_STEPS_PER_PERIOD);
    let steps = steps_per_period(&probe)?;
    let mut scenario = Scenario::natural("web", field, periods, steps);
    scenario.grid_points = POINTS;
    // coarse steps: the demo shows the agreement, not the acceptance margin
    scenario.tolerances.equivalence = 1e-3;
    let run = run_scenario(&scenario)?;
    let psi = &run.final_state;
    let report = run.report;
    Ok(Simulation {
        x: psi.grid.xs().collect(),
        density: psi.density().collect(),
        sup_discrepancy: report.summary.sup_discrepancy,
        equivalent: report.verdicts.equivalent,
        t: report.series.t,
        q_c: report.series.q_c,
        x2_schrodinger: report.series.x2_schrodinger,
        x2_heisenberg: report.series.x2_heisenberg,
    })
}

/// Keeps ħ·dt·(peak energy) under the engine's phase-per-step limit with
/// some margin, using the classical energy plus the vacuum energy.
fn steps_per_period(probe: &Scenario) -> picture_lab_core::Result<usize> {
    let traj = solve_trajectory(&probe.params, &probe.field, probe.ics, probe.time)?;
    let peak = (0..traj.len()).map(|i| traj.energy(i)).fold(0.0, f64::max) + 0.5;
    let needed = (probe.params.period() * peak / (0.8 * MAX_PHASE_PER_STEP)).ceil() as usize;
    Ok(needed.max(MIN_STEPS_PER_PERIOD))
}

/// `[correct, flawed]` values of ⟨x²⟩ for an undriven oscillator: the
/// vacuum variance ħ/2mω₀ and the doubled value the substitution produces.
#[wasm_bindgen]
pub fn flawed_vs_correct(mass: f64, omega0: f64, hbar: f64) -> Result<Vec<f64>, JsError> {
    vacuum_pair(mass, omega0, hbar).map_err(js_err)
}

fn vacuum_pair(mass: f64, omega0: f64, hbar: f64) -> picture_lab_core::Result<Vec<f64>> {
    let params = OscillatorParams::new(mass, omega0, 1.0, hbar)?;
    let vacuum = params.vacuum_variance();
    Ok(vec![
        vacuum,
        picture_lab_core::lab::flawed_pipeline_value(vacuum, vacuum),
    ])
}

/// ⟨x²⟩ of a coherent state centred on `q` with velocity `v`, evaluated on
/// the grid. It depends on `q` only.
#[wasm_bindgen]
pub fn packet_moment(q: f64, v: f64) -> Result<f64, JsError> {
    moment(q, v).map_err(js_err)
}

fn moment(q: f64, v: f64) -> picture_lab_core::Result<f64> {
    let params = OscillatorParams::default();
    let grid = PositionGrid::for_displacement(&params, q.abs(), POINTS)?;
    let psi = displaced_state(&params, grid, q, v, 0.0)?;
    expectation_x2(&psi)
}
