//! Physical constants, drive models and time grids shared by every engine.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mass, frequency, charge and ħ of the one-dimensional oscillator.
///
/// Defaults to natural units with unit charge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub mass: f64,
    pub omega0: f64,
    pub charge: f64,
    pub hbar: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            omega0: 1.0,
            charge: 1.0,
            hbar: 1.0,
        }
    }
}

impl OscillatorParams {
    pub fn new(mass: f64, omega0: f64, charge: f64, hbar: f64) -> Result<Self> {
        let params = Self {
            mass,
            omega0,
            charge,
            hbar,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("omega0", self.omega0),
            ("hbar", self.hbar),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive")));
            }
        }
        if !self.charge.is_finite() {
            return Err(Error::InvalidParams("charge must be finite".into()));
        }
        let sigma = ground_state_width(self);
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParams(
                "ground-state width is not finite and positive".into(),
            ));
        }
        Ok(())
    }

    /// Free-oscillator position variance ħ/(2mω₀).
    pub fn vacuum_variance(&self) -> f64 {
        self.hbar / (2.0 * self.mass * self.omega0)
    }

    pub fn period(&self) -> f64 {
        TAU / self.omega0
    }
}

/// Standard deviation of the ground-state position density, √(ħ/2mω₀).
pub fn ground_state_width(params: &OscillatorParams) -> f64 {
    params.vacuum_variance().sqrt()
}

/// One cosine component `amplitude · cos(omega · t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

/// The classical electric field E(t) acting on the charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Drive {
    Zero,
    Monochromatic {
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// Deterministic stand-in for a classical background field. `seed` records
    /// the generator state the phases were drawn from, if any.
    ModeSum {
        modes: Vec<Mode>,
        seed: Option<u64>,
    },
}

impl Drive {
    /// `count` modes evenly spaced across `[band.0, band.1]`, each with
    /// amplitude `total_amplitude / √count` and a phase drawn uniformly
    /// from `[0, 2π)` by a ChaCha8 generator seeded with `seed`.
    pub fn seeded_mode_sum(
        count: usize,
        total_amplitude: f64,
        band: (f64, f64),
        seed: u64,
    ) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParams("mode count must be at least 1".into()));
        }
        let (lo, hi) = band;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo) {
            return Err(Error::InvalidParams(
                "mode band must satisfy 0 < lo <= hi".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amplitude = total_amplitude / (count as f64).sqrt();
        let modes = (0..count)
            .map(|k| {
                let omega = if count == 1 {
                    lo
                } else {
                    let s = k as f64 / (count - 1) as f64;
                    lo * (1.0 - s) + hi * s
                };
                Mode {
                    amplitude,
                    omega,
                    phase: rng.random_range(0.0..TAU),
                }
            })
            .collect();
        Ok(Drive::ModeSum {
            modes,
            seed: Some(seed),
        })
    }

    /// Largest angular frequency present in the drive, if any.
    pub fn max_frequency(&self) -> Option<f64> {
        match self {
            Drive::Zero => None,
            Drive::Monochromatic { omega, .. } => Some(omega.abs()),
            Drive::ModeSum { modes, .. } => modes
                .iter()
                .map(|m| m.omega.abs())
                .fold(None, |acc: Option<f64>, w| {
                    Some(acc.map_or(w, |a| a.max(w)))
                }),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        match self {
            Drive::Zero => Drive::Zero,
            Drive::Monochromatic {
                amplitude,
                omega,
                phase,
            } => Drive::Monochromatic {
                amplitude: amplitude * factor,
                omega: *omega,
                phase: *phase,
            },
            Drive::ModeSum { modes, seed } => Drive::ModeSum {
                modes: modes
                    .iter()
                    .map(|m| Mode {
                        amplitude: m.amplitude * factor,
                        ..*m
                    })
                    .collect(),
                seed: *seed,
            },
        }
    }
}

/// Drive plus the phenomenological radiation-reaction damping rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldModel {
    pub drive: Drive,
    /// Damping rate γ ≥ 0 entering the equation of motion as −mγq̇.
    pub gamma: f64,
}

impl Default for FieldModel {
    fn default() -> Self {
        Self::zero()
    }
}

impl FieldModel {
    pub fn zero() -> Self {
        Self {
            drive: Drive::Zero,
            gamma: 0.0,
        }
    }

    pub fn monochromatic(amplitude: f64, omega: f64, phase: f64) -> Self {
        Self {
            drive: Drive::Monochromatic {
                amplitude,
                omega,
                phase,
            },
            gamma: 0.0,
        }
    }

    pub fn mode_sum(modes: Vec<Mode>) -> Self {
        Self {
            drive: Drive::ModeSum { modes, seed: None },
            gamma: 0.0,
        }
    }

    pub fn with_damping(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParams("damping must be non-negative".into()));
        }
        let finite =
            |m: &Mode| m.amplitude.is_finite() && m.omega.is_finite() && m.phase.is_finite();
        let ok = match &self.drive {
            Drive::Zero => true,
            Drive::Monochromatic {
                amplitude,
                omega,
                phase,
            } => finite(&Mode {
                amplitude: *amplitude,
                omega: *omega,
                phase: *phase,
            }),
            Drive::ModeSum { modes, .. } => modes.iter().all(finite),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(
                "drive parameters must be finite".into(),
            ))
        }
    }

    pub fn is_damped(&self) -> bool {
        self.gamma > 0.0
    }
}

/// E(t) for the given field model.
pub fn evaluate_field(model: &FieldModel, t: f64) -> f64 {
    match &model.drive {
        Drive::Zero => 0.0,
        Drive::Monochromatic {
            amplitude,
            omega,
            phase,
        } => amplitude * (omega * t + phase).cos(),
        Drive::ModeSum { modes, .. } => modes
            .iter()
            .map(|m| m.amplitude * (m.omega * t + m.phase).cos())
            .sum(),
    }
}

/// Uniform grid `t0, t0 + dt, …, t1` with `n_steps` intervals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, n_steps: usize) -> Result<Self> {
        if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
            return Err(Error::InvalidParams("time grid needs t1 > t0".into()));
        }
        if n_steps == 0 {
            return Err(Error::InvalidParams(
                "time grid needs at least one step".into(),
            ));
        }
        Ok(Self { t0, t1, n_steps })
    }

    /// Grid covering `[t0, t0 + span]` with steps no longer than `max_dt`.
    pub fn with_max_step(t0: f64, span: f64, max_dt: f64) -> Result<Self> {
        let n = (span / max_dt).ceil().max(1.0) as usize;
        Self::new(t0, t0 + span, n)
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.n_steps as f64
    }

    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        if i == self.n_steps {
            self.t1
        } else {
            self.t0 + i as f64 * self.dt()
        }
    }

    /// Index of the grid point at time `t`, if `t` lies on the grid.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t0) / self.dt();
        let i = x.round();
        if i < 0.0 || i > self.n_steps as f64 || (x - i).abs() > 1e-6 {
            return None;
        }
        Some(i as usize)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.time(i))
    }
}
