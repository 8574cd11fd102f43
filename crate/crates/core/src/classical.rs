//! Classical c-number trajectory q_c(t) of the driven, damped oscillator.
//!
//! m q̈ = −m ω₀² q − m γ q̇ + e E(t), integrated with fixed-step RK4. The
//! Lagrangian action is carried along because the exact Schrödinger solution
//! needs it for its global phase.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate_field, FieldModel, OscillatorParams, TimeGrid};

/// Minimum number of steps per shortest period (oscillator or drive).
pub const STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InitialConditions {
    pub q0: f64,
    pub v0: f64,
}

impl InitialConditions {
    pub fn new(q0: f64, v0: f64) -> Result<Self> {
        if !(q0.is_finite() && v0.is_finite()) {
            return Err(Error::InvalidParams(
                "initial conditions must be finite".into(),
            ));
        }
        Ok(Self { q0, v0 })
    }
}

#[derive(Debug, Clone)]
pub struct ClassicalTrajectory {
    pub grid: TimeGrid,
    pub params: OscillatorParams,
    pub field: FieldModel,
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    /// ∫ [½mq̇² − ½mω₀²q² + F q] dt from t0, F the effective force.
    pub action: Vec<f64>,
}

/// Largest step the fixed-step integrators accept for this oscillator and drive.
pub fn max_stable_step(params: &OscillatorParams, field: &FieldModel) -> f64 {
    let mut shortest = TAU / params.omega0;
    if let Some(w) = field.drive.max_frequency().filter(|w| *w > 0.0) {
        shortest = shortest.min(TAU / w);
    }
    shortest / STEPS_PER_PERIOD
}

pub(crate) fn check_step(
    params: &OscillatorParams,
    field: &FieldModel,
    grid: &TimeGrid,
) -> Result<()> {
    let limit = max_stable_step(params, field);
    let dt = grid.dt();
    if dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepTooCoarse { dt, limit });
    }
    Ok(())
}

/// Classic fourth-order Runge–Kutta step for a fixed-size state.
pub(crate) fn rk4_step<const N: usize>(
    y: &[f64; N],
    t: f64,
    h: f64,
    f: impl Fn(f64, &[f64; N]) -> [f64; N],
) -> [f64; N] {
    let axpy = |a: &[f64; N], s: f64, b: &[f64; N]| {
        let mut out = *a;
        out.iter_mut().zip(b).for_each(|(o, bi)| *o += s * bi);
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k1));
    let k3 = f(t + 0.5 * h, &axpy(y, 0.5 * h, &k2));
    let k4 = f(t + h, &axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

pub fn solve_trajectory(
    params: &OscillatorParams,
    field: &FieldModel,
    ics: InitialConditions,
    grid: TimeGrid,
) -> Result<ClassicalTrajectory> {
    params.validate()?;
    field.validate()?;
    check_step(params, field, &grid)?;

    let (m, w2, gamma, e) = (
        params.mass,
        params.omega0.powi(2),
        field.gamma,
        params.charge,
    );
    let rhs = |t: f64, y: &[f64; 3]| {
        let (q, v) = (y[0], y[1]);
        let force = e * evaluate_field(field, t) - m * gamma * v;
        [
            v,
            -w2 * q + force / m,
            0.5 * m * v * v - 0.5 * m * w2 * q * q + force * q,
        ]
    };

    let n = grid.len();
    let (mut q, mut qdot, mut action) = (
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    );
    let mut y = [ics.q0, ics.v0, 0.0];
    let dt = grid.dt();
    for i in 0..n {
        q.push(y[0]);
        qdot.push(y[1]);
        action.push(y[2]);
        if i + 1 < n {
            let t = grid.time(i);
            y = rk4_step(&y, t, dt, rhs);
            if !y.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteState { t: t + dt });
            }
        }
    }

    Ok(ClassicalTrajectory {
        grid,
        params: *params,
        field: field.clone(),
        q,
        qdot,
        action,
    })
}

impl ClassicalTrajectory {
    pub fn len(&self) -> usize {
        self.q.len()
    }

    pub fn is_empty(&self) -> bool {
        self.q.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.times()
    }

    pub fn max_abs_q(&self) -> f64 {
        self.q.iter().fold(0.0f64, |a, q| a.max(q.abs()))
    }

    fn acceleration(&self, i: usize) -> f64 {
        let p = &self.params;
        let force = p.charge * evaluate_field(&self.field, self.grid.time(i))
            - p.mass * self.field.gamma * self.qdot[i];
        -p.omega0.powi(2) * self.q[i] + force / p.mass
    }

    /// q̇_c(t) by cubic Hermite interpolation between samples, using the
    /// equation of motion for the derivative. Clamped to the grid ends.
    pub fn velocity_at(&self, t: f64) -> f64 {
        let dt = self.grid.dt();
        let x = ((t - self.grid.t0) / dt).clamp(0.0, self.grid.n_steps as f64);
        let i = (x.floor() as usize).min(self.grid.n_steps.saturating_sub(1));
        let s = x - i as f64;
        if s == 0.0 {
            return self.qdot[i];
        }
        let (v0, v1) = (self.qdot[i], self.qdot[i + 1]);
        let (a0, a1) = (self.acceleration(i) * dt, self.acceleration(i + 1) * dt);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * v0
            + (s3 - 2.0 * s2 + s) * a0
            + (-2.0 * s3 + 3.0 * s2) * v1
            + (s3 - s2) * a1
    }

    /// The c-number force e·E(t) − mγq̇_c(t) felt by the quantum oscillator:
    /// the external drive plus the radiation-reaction field of this trajectory.
    pub fn effective_force(&self) -> impl Fn(f64) -> f64 + '_ {
        move |t| {
            let p = &self.params;
            let drive = p.charge * evaluate_field(&self.field, t);
            if self.field.gamma > 0.0 {
                drive - p.mass * self.field.gamma * self.velocity_at(t)
            } else {
                drive
            }
        }
    }

    /// Mechanical energy ½mq̇² + ½mω₀²q² at sample `i`.
    pub fn energy(&self, i: usize) -> f64 {
        let p = &self.params;
        0.5 * p.mass * (self.qdot[i].powi(2) + p.omega0.powi(2) * self.q[i].powi(2))
    }
}

/// Earliest sample time after which |q_c| stays below `threshold` until the
/// end of the grid, or `None` if the final sample still exceeds it.
pub fn decay_certificate(traj: &ClassicalTrajectory, threshold: f64) -> Result<Option<f64>> {
    if !traj.field.is_damped() {
        return Err(Error::NotDamped);
    }
    match traj.q.iter().rposition(|q| q.abs() >= threshold) {
        None => Ok(Some(traj.grid.t0)),
        Some(i) if i + 1 == traj.len() => Ok(None),
        Some(i) => Ok(Some(traj.grid.time(i + 1))),
    }
}
