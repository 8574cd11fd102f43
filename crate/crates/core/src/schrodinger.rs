//! Schrödinger-picture engine on a uniform periodic position grid.
//!
//! States are sampled at `x_j = −L + j·dx`, `dx = 2L/n`. Propagation uses
//! kinetic–potential–kinetic Strang splitting with the kinetic factor applied
//! in Fourier space, under H(t) = p²/2m + ½mω₀²x² − F(t)x.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::classical::ClassicalTrajectory;
use crate::error::{Error, Result};
use crate::model::{ground_state_width, OscillatorParams, TimeGrid};

/// Minimum clearance between the packet centre and the grid edge, in units
/// of the ground-state width.
pub const MIN_EDGE_CLEARANCE: f64 = 8.0;
/// Clearance used when a grid is sized automatically.
pub const DEFAULT_EDGE_CLEARANCE: f64 = 10.0;
pub const DEFAULT_POINTS: usize = 2048;
pub const MIN_POINTS: usize = 256;
/// Largest admissible edge-to-peak density ratio during propagation.
pub const EDGE_DENSITY_LIMIT: f64 = 1e-12;
/// Upper bound on dt · max(⟨T⟩, ⟨V⟩) / ħ for the propagated state.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;
/// Steps between boundary checks when no sample falls in between.
const BOUNDARY_CHECK_EVERY: usize = 64;
const NORM_TOLERANCE: f64 = 1e-6;
const CROSS_TERM_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionGrid {
    pub half_width: f64,
    pub n_points: usize,
}

impl PositionGrid {
    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidParams(
                "grid half-width must be positive".into(),
            ));
        }
        if n_points < MIN_POINTS || !n_points.is_power_of_two() {
            return Err(Error::InvalidParams(format!(
                "grid points must be a power of two >= {MIN_POINTS}, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    /// Grid wide enough to hold a packet displaced by up to `max_abs_q`.
    pub fn for_displacement(
        params: &OscillatorParams,
        max_abs_q: f64,
        n_points: usize,
    ) -> Result<Self> {
        let sigma = ground_state_width(params);
        Self::new(max_abs_q + DEFAULT_EDGE_CLEARANCE * sigma, n_points)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_width / self.n_points as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.dx()
    }

    pub fn xs(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|j| self.x(j))
    }

    /// Angular wavenumber of FFT bin `j`.
    pub fn k(&self, j: usize) -> f64 {
        let n = self.n_points;
        let m = if j < n / 2 {
            j as f64
        } else {
            j as f64 - n as f64
        };
        TAU * m / (n as f64 * self.dx())
    }

    fn require_clearance(&self, params: &OscillatorParams, centre: f64) -> Result<()> {
        let required = centre.abs() + MIN_EDGE_CLEARANCE * ground_state_width(params);
        if required > self.half_width {
            return Err(Error::GridTooNarrow {
                required,
                half_width: self.half_width,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridWavefunction {
    pub grid: PositionGrid,
    pub psi: Vec<Complex64>,
}

impl GridWavefunction {
    pub fn norm(&self) -> f64 {
        self.grid.dx() * self.psi.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    fn moment(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.grid.dx()
            * self
                .grid
                .xs()
                .zip(&self.psi)
                .map(|(x, c)| f(x) * c.norm_sqr())
                .sum::<f64>()
    }

    pub fn mean_x(&self) -> f64 {
        self.moment(|x| x)
    }

    pub fn density(&self) -> impl Iterator<Item = f64> + '_ {
        self.psi.iter().map(|c| c.norm_sqr())
    }

    /// ⟨self|other⟩ by grid quadrature.
    pub fn overlap(&self, other: &GridWavefunction) -> Complex64 {
        self.psi
            .iter()
            .zip(&other.psi)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    pub fn fidelity(&self, other: &GridWavefunction) -> f64 {
        self.overlap(other).norm()
    }

    /// Largest density in the two outermost samples relative to the peak.
    pub fn edge_ratio(&self) -> f64 {
        let n = self.psi.len();
        let peak = self.density().fold(0.0, f64::max);
        let edge = self.psi[0].norm_sqr().max(self.psi[n - 1].norm_sqr());
        if peak > 0.0 {
            edge / peak
        } else {
            0.0
        }
    }

    fn normalize(&mut self) {
        let s = self.norm().sqrt().recip();
        self.psi.iter_mut().for_each(|c| *c *= s);
    }
}

/// Largest momentum-space density in the two bins at the Nyquist wavenumber,
/// relative to the peak. Scale-free, so `psi_k` need not be normalized.
fn nyquist_ratio(psi_k: &[Complex64]) -> f64 {
    let n = psi_k.len();
    let peak = psi_k.iter().map(|c| c.norm_sqr()).fold(0.0, f64::max);
    let edge = psi_k[n / 2].norm_sqr().max(psi_k[n / 2 - 1].norm_sqr());
    if peak > 0.0 {
        edge / peak
    } else {
        0.0
    }
}

/// ⟨x²⟩ = dx Σ x² |ψ|².
pub fn expectation_x2(psi: &GridWavefunction) -> Result<f64> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    Ok(psi.moment(|x| x * x))
}

/// The two integrals obtained after shifting the integration variable by q_c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct X2Decomposition {
    /// ∫ φ₀* x² φ₀, the free-oscillator spread.
    pub vacuum_term: f64,
    /// ∫ φ₀* q_c² φ₀ = q_c².
    pub shift_term: f64,
}

impl X2Decomposition {
    pub fn total(&self) -> f64 {
        self.vacuum_term + self.shift_term
    }
}

pub fn decompose_x2(psi: &GridWavefunction, q_c: f64) -> Result<X2Decomposition> {
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let cross = psi.moment(|x| x - q_c);
    if cross.abs() > CROSS_TERM_TOLERANCE {
        return Err(Error::NotDisplacedGaussian { cross });
    }
    Ok(X2Decomposition {
        vacuum_term: psi.moment(|x| (x - q_c).powi(2)),
        shift_term: q_c * q_c * norm,
    })
}

/// Normalized φ₀ on the grid.
pub fn ground_state(params: &OscillatorParams, grid: PositionGrid) -> Result<GridWavefunction> {
    displaced_state(params, grid, 0.0, 0.0, 0.0)
}

/// φ₀(x − q_c) · exp(i m v_c (x − q_c)/ħ) · exp(iS), normalized on the grid.
pub fn displaced_state(
    params: &OscillatorParams,
    grid: PositionGrid,
    q_c: f64,
    v_c: f64,
    phase: f64,
) -> Result<GridWavefunction> {
    params.validate()?;
    grid.require_clearance(params, q_c)?;
    let alpha = params.mass * params.omega0 / params.hbar;
    let amp = (alpha / PI).powf(0.25);
    let k = params.mass * v_c / params.hbar;
    let psi = grid
        .xs()
        .map(|x| {
            let y = x - q_c;
            Complex64::from_polar(amp * (-0.5 * alpha * y * y).exp(), k * y + phase)
        })
        .collect();
    let mut out = GridWavefunction { grid, psi };
    out.normalize();
    Ok(out)
}

/// Global phase S(t) and boost momentum m·q̇_c(t) of the exact displaced solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseRecord {
    pub phase: f64,
    pub boost_momentum: f64,
}

/// S(t) = (1/ħ)∫[½mq̇² − ½mω₀²q² + F q]dt − ω₀(t − t0)/2 at trajectory sample `i`.
pub fn phase_record(traj: &ClassicalTrajectory, i: usize) -> PhaseRecord {
    let p = &traj.params;
    let elapsed = traj.grid.time(i) - traj.grid.t0;
    PhaseRecord {
        phase: traj.action[i] / p.hbar - 0.5 * p.omega0 * elapsed,
        boost_momentum: p.mass * traj.qdot[i],
    }
}

/// Exact displaced solution at trajectory sample `i`.
pub fn exact_state(
    traj: &ClassicalTrajectory,
    grid: PositionGrid,
    i: usize,
) -> Result<GridWavefunction> {
    let rec = phase_record(traj, i);
    displaced_state(&traj.params, grid, traj.q[i], traj.qdot[i], rec.phase)
}

/// Reusable split-step machinery for one grid and step size.
pub struct SplitStepper {
    params: OscillatorParams,
    grid: PositionGrid,
    dt: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    kinetic_half: Vec<Complex64>,
    harmonic: Vec<Complex64>,
}

impl SplitStepper {
    pub fn new(params: &OscillatorParams, grid: PositionGrid, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParams("time step must be positive".into()));
        }
        let n = grid.n_points;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let (m, hbar) = (params.mass, params.hbar);
        // 1/n of the unnormalized inverse transform folded into one half
        let kinetic_half = (0..n)
            .map(|j| {
                let k = grid.k(j);
                Complex64::cis(-hbar * k * k * dt / (4.0 * m))
            })
            .collect();
        let harmonic = grid
            .xs()
            .map(|x| Complex64::cis(-dt * 0.5 * m * (params.omega0 * x).powi(2) / hbar))
            .collect();
        Ok(Self {
            params: *params,
            grid,
            dt,
            forward,
            inverse,
            scratch: vec![Complex64::default(); scratch_len],
            kinetic_half,
            harmonic,
        })
    }

    fn forward_fft(&mut self, psi: &mut [Complex64]) {
        self.forward.process_with_scratch(psi, &mut self.scratch);
    }

    fn inverse_fft(&mut self, psi: &mut [Complex64]) {
        self.inverse.process_with_scratch(psi, &mut self.scratch);
        let s = 1.0 / self.grid.n_points as f64;
        psi.iter_mut().for_each(|c| *c *= s);
    }

    fn apply_potential(&self, psi: &mut [Complex64], force: f64) {
        // exp(i dt F x / ħ), reseeded every block to bound recurrence error
        const BLOCK: usize = 32;
        let theta = self.dt * force / self.params.hbar;
        let ratio = Complex64::cis(theta * self.grid.dx());
        for (b, chunk) in psi.chunks_mut(BLOCK).enumerate() {
            let start = b * BLOCK;
            let mut w = Complex64::cis(theta * self.grid.x(start));
            for (c, h) in chunk.iter_mut().zip(&self.harmonic[start..]) {
                *c *= h * w;
                w *= ratio;
            }
        }
    }

    /// Mean kinetic and harmonic potential energy of a state given in
    /// momentum space (unnormalized forward transform).
    fn energy_scales(&self, psi_k: &[Complex64]) -> (f64, f64, f64) {
        let (m, hbar) = (self.params.mass, self.params.hbar);
        let n = self.grid.n_points as f64;
        let dx = self.grid.dx();
        // Parseval: Σ|ψ_k|² = n Σ|ψ_j|²
        let kinetic = psi_k
            .iter()
            .enumerate()
            .map(|(j, c)| hbar * hbar * self.grid.k(j).powi(2) / (2.0 * m) * c.norm_sqr())
            .sum::<f64>()
            * dx
            / n;
        let mut position = psi_k.to_vec();
        self.inverse.process(&mut position);
        let potential = self
            .grid
            .xs()
            .zip(&position)
            .map(|(x, c)| 0.5 * m * (self.params.omega0 * x).powi(2) * c.norm_sqr())
            .sum::<f64>()
            * dx
            / (n * n);
        (kinetic, potential, self.dt * kinetic.max(potential) / hbar)
    }

    fn check_step(&self, psi_k: &[Complex64]) -> Result<()> {
        let (kinetic, potential, phase) = self.energy_scales(psi_k);
        if phase >= MAX_PHASE_PER_STEP {
            return Err(Error::StepTooCoarse {
                dt: self.dt,
                limit: MAX_PHASE_PER_STEP * self.params.hbar / kinetic.max(potential),
            });
        }
        Ok(())
    }

    /// One full step from `t` with `psi_k` held in momentum space.
    fn step(&mut self, psi_k: &mut [Complex64], t: f64, force: &impl Fn(f64) -> f64) {
        psi_k
            .iter_mut()
            .zip(&self.kinetic_half)
            .for_each(|(c, k)| *c *= k);
        self.inverse_fft(psi_k);
        self.apply_potential(psi_k, force(t + 0.5 * self.dt));
        self.forward_fft(psi_k);
        psi_k
            .iter_mut()
            .zip(&self.kinetic_half)
            .for_each(|(c, k)| *c *= k);
    }
}

/// Propagate `psi` across `time` under the effective force `force(t)`,
/// calling `observe(i, t, ψ)` at every `sample_every`-th grid index and at
/// the final time. Returns the final state.
pub fn propagate_observed(
    psi: &GridWavefunction,
    params: &OscillatorParams,
    force: impl Fn(f64) -> f64,
    time: TimeGrid,
    sample_every: usize,
    mut observe: impl FnMut(usize, f64, &GridWavefunction),
) -> Result<GridWavefunction> {
    params.validate()?;
    let norm = psi.norm();
    if (norm - 1.0).abs() > NORM_TOLERANCE {
        return Err(Error::NotNormalized { norm });
    }
    let sample_every = sample_every.max(1);
    let mut stepper = SplitStepper::new(params, psi.grid, time.dt())?;
    let mut snapshot = psi.clone();
    let check = |state: &GridWavefunction, psi_k: &[Complex64], t: f64| {
        let ratio = state.edge_ratio();
        if ratio > EDGE_DENSITY_LIMIT {
            return Err(Error::DensityAtBoundary { t, ratio });
        }
        let ratio = nyquist_ratio(psi_k);
        if ratio > EDGE_DENSITY_LIMIT {
            return Err(Error::MomentumAliasing { t, ratio });
        }
        Ok(())
    };

    let mut psi_k = psi.psi.clone();
    stepper.forward_fft(&mut psi_k);
    check(&snapshot, &psi_k, time.t0)?;
    observe(0, time.t0, &snapshot);
    stepper.check_step(&psi_k)?;
    for i in 1..time.len() {
        stepper.step(&mut psi_k, time.time(i - 1), &force);
        let sample = i % sample_every == 0 || i == time.n_steps;
        if sample || i % BOUNDARY_CHECK_EVERY == 0 {
            snapshot.psi.copy_from_slice(&psi_k);
            stepper.inverse_fft(&mut snapshot.psi);
            let t = time.time(i);
            check(&snapshot, &psi_k, t)?;
            stepper.check_step(&psi_k)?;
            if sample {
                observe(i, t, &snapshot);
            }
        }
    }
    Ok(snapshot)
}

pub fn propagate(
    psi: &GridWavefunction,
    params: &OscillatorParams,
    force: impl Fn(f64) -> f64,
    time: TimeGrid,
) -> Result<GridWavefunction> {
    propagate_observed(psi, params, force, time, time.n_steps, |_, _, _| {})
}
