//! Heisenberg-picture engine in a truncated number basis.
//!
//! Operators evolve as dx̂/dt = p̂/m, dp̂/dt = −mω₀²x̂ + F(t)·1 and are read
//! out in the oscillator ground state. Two routes are provided: a brute-force
//! matrix integration and the closed form x̂_H(t) = a(t)x̂ + b(t)p̂ + ξ(t)·1.
//! The initial data of ξ is the initial displacement, so the operators
//! start as the displaced pair x̂ + q0, p̂ + m·v0.

use ndarray::{Array2, ArrayView1};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::classical::{check_step, solve_trajectory, InitialConditions};
use crate::error::{Error, Result};
use crate::model::{evaluate_field, ground_state_width, FieldModel, OscillatorParams, TimeGrid};

pub const MIN_DIMENSION: usize = 16;
pub const DEFAULT_DIMENSION: usize = 64;
/// Largest admissible population of the two topmost levels in x̂_H|0⟩.
pub const TRUNCATION_LIMIT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorUnit {
    Length,
    Momentum,
    Action,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    pub matrix: Array2<Complex64>,
    pub unit: OperatorUnit,
}

impl FockOperator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn max_hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        m.indexed_iter()
            .map(|((i, j), z)| (z - m[[j, i]].conj()).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &FockOperator) -> f64 {
        frobenius(&(&self.matrix - &other.matrix))
    }
}

pub(crate) fn frobenius(m: &Array2<Complex64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// [a, b] = ab − ba.
pub fn commutator(a: &FockOperator, b: &FockOperator) -> Array2<Complex64> {
    a.matrix.dot(&b.matrix) - b.matrix.dot(&a.matrix)
}

/// Largest deviation of `[x, p]` from iħ·1 on the upper-left `block × block` corner.
pub fn commutator_defect(x: &FockOperator, p: &FockOperator, hbar: f64, block: usize) -> f64 {
    let c = commutator(x, p);
    let mut worst = 0.0f64;
    for i in 0..block {
        for j in 0..block {
            let target = if i == j {
                Complex64::new(0.0, hbar)
            } else {
                Complex64::default()
            };
            worst = worst.max((c[[i, j]] - target).norm());
        }
    }
    worst
}

/// x̂ = √(ħ/2mω₀)(a + a†) and p̂ = i√(ħmω₀/2)(a† − a) in the lowest `dim` number states.
pub fn build_ladder_operators(
    params: &OscillatorParams,
    dim: usize,
) -> Result<(FockOperator, FockOperator)> {
    params.validate()?;
    if dim < MIN_DIMENSION {
        return Err(Error::InvalidParams(format!(
            "Fock dimension must be at least {MIN_DIMENSION}, got {dim}"
        )));
    }
    let xs = ground_state_width(params);
    let ps = (params.hbar * params.mass * params.omega0 / 2.0).sqrt();
    let mut x = Array2::zeros((dim, dim));
    let mut p = Array2::zeros((dim, dim));
    for n in 1..dim {
        let s = (n as f64).sqrt();
        // ⟨n−1|a|n⟩ = ⟨n|a†|n−1⟩ = √n
        x[[n - 1, n]] = Complex64::new(xs * s, 0.0);
        x[[n, n - 1]] = Complex64::new(xs * s, 0.0);
        p[[n, n - 1]] = Complex64::new(0.0, ps * s);
        p[[n - 1, n]] = Complex64::new(0.0, -ps * s);
    }
    Ok((
        FockOperator {
            matrix: x,
            unit: OperatorUnit::Length,
        },
        FockOperator {
            matrix: p,
            unit: OperatorUnit::Momentum,
        },
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeisenbergRoute {
    /// Cosine/sine operator coefficients plus the classical c-number shift.
    ClosedForm,
    /// Brute-force RK4 integration of the full operator matrices, keeping
    /// every `record_every`-th sample (and the last).
    Matrix { record_every: usize },
}

#[derive(Debug, Clone)]
pub struct MatrixSample {
    pub index: usize,
    pub x: FockOperator,
    pub p: FockOperator,
}

#[derive(Debug, Clone)]
pub enum HeisenbergEvolution {
    ClosedForm {
        a: Vec<f64>,
        b: Vec<f64>,
        xi: Vec<f64>,
    },
    Matrix {
        samples: Vec<MatrixSample>,
    },
}

#[derive(Debug, Clone)]
pub struct HeisenbergSolution {
    pub grid: TimeGrid,
    pub params: OscillatorParams,
    pub dim: usize,
    pub evolution: HeisenbergEvolution,
    ladder: (FockOperator, FockOperator),
}

pub fn evolve_heisenberg(
    params: &OscillatorParams,
    field: &FieldModel,
    ics: InitialConditions,
    grid: TimeGrid,
    dim: usize,
    route: HeisenbergRoute,
) -> Result<HeisenbergSolution> {
    check_step(params, field, &grid)?;
    let ladder = build_ladder_operators(params, dim)?;
    let evolution = match route {
        HeisenbergRoute::ClosedForm => {
            let xi = solve_trajectory(params, field, ics, grid)?.q;
            let w = params.omega0;
            let (a, b) = grid
                .times()
                .map(|t| {
                    let phase = w * (t - grid.t0);
                    (phase.cos(), phase.sin() / (params.mass * w))
                })
                .unzip();
            HeisenbergEvolution::ClosedForm { a, b, xi }
        }
        HeisenbergRoute::Matrix { record_every } => HeisenbergEvolution::Matrix {
            samples: integrate_matrices(params, field, ics, grid, &ladder, record_every.max(1))?,
        },
    };
    Ok(HeisenbergSolution {
        grid,
        params: *params,
        dim,
        evolution,
        ladder,
    })
}

fn integrate_matrices(
    params: &OscillatorParams,
    field: &FieldModel,
    ics: InitialConditions,
    grid: TimeGrid,
    (x0, p0): &(FockOperator, FockOperator),
    record_every: usize,
) -> Result<Vec<MatrixSample>> {
    let dim = x0.dim();
    let identity = Array2::<Complex64>::eye(dim);
    let (m, w2, gamma) = (params.mass, params.omega0.powi(2), field.gamma);

    // radiation reaction is the mean-field force −γ⟨0|p̂_H|0⟩
    let rhs = |t: f64, x: &Array2<Complex64>, p: &Array2<Complex64>| {
        let force = params.charge * evaluate_field(field, t) - gamma * p[[0, 0]].re;
        let dx = p / m;
        let dp = x * (-m * w2) + &identity * force;
        (dx, dp)
    };

    let mut x = &x0.matrix + &(&identity * ics.q0);
    let mut p = &p0.matrix + &(&identity * (m * ics.v0));
    let h = grid.dt();
    let record = |index: usize, x: &Array2<Complex64>, p: &Array2<Complex64>| MatrixSample {
        index,
        x: FockOperator {
            matrix: x.clone(),
            unit: OperatorUnit::Length,
        },
        p: FockOperator {
            matrix: p.clone(),
            unit: OperatorUnit::Momentum,
        },
    };

    let mut samples = vec![record(0, &x, &p)];
    for i in 1..grid.len() {
        let t = grid.time(i - 1);
        let (k1x, k1p) = rhs(t, &x, &p);
        let (k2x, k2p) = rhs(
            t + 0.5 * h,
            &(&x + &(&k1x * (0.5 * h))),
            &(&p + &(&k1p * (0.5 * h))),
        );
        let (k3x, k3p) = rhs(
            t + 0.5 * h,
            &(&x + &(&k2x * (0.5 * h))),
            &(&p + &(&k2p * (0.5 * h))),
        );
        let (k4x, k4p) = rhs(t + h, &(&x + &(&k3x * h)), &(&p + &(&k3p * h)));
        x = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        p = p + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
        if !x[[0, 0]].re.is_finite() || !p[[0, 0]].re.is_finite() {
            return Err(Error::NonFiniteState { t: t + h });
        }
        if i % record_every == 0 || i == grid.n_steps {
            samples.push(record(i, &x, &p));
        }
    }
    Ok(samples)
}

impl HeisenbergSolution {
    fn index(&self, t: f64) -> Result<usize> {
        self.grid.index_of(t).ok_or(Error::NotOnGrid { t })
    }

    fn matrix_sample(&self, i: usize) -> Result<&MatrixSample> {
        match &self.evolution {
            HeisenbergEvolution::Matrix { samples } => samples
                .binary_search_by_key(&i, |s| s.index)
                .map(|k| &samples[k])
                .map_err(|_| Error::NotOnGrid {
                    t: self.grid.time(i),
                }),
            HeisenbergEvolution::ClosedForm { .. } => unreachable!(),
        }
    }

    /// Grid indices for which operators are available.
    pub fn sample_indices(&self) -> Vec<usize> {
        match &self.evolution {
            HeisenbergEvolution::ClosedForm { xi, .. } => (0..xi.len()).collect(),
            HeisenbergEvolution::Matrix { samples } => samples.iter().map(|s| s.index).collect(),
        }
    }

    /// x̂_H at grid index `i`.
    pub fn position_operator_at(&self, i: usize) -> Result<FockOperator> {
        match &self.evolution {
            HeisenbergEvolution::ClosedForm { a, b, xi } => {
                if i >= xi.len() {
                    return Err(Error::NotOnGrid {
                        t: self.grid.time(i),
                    });
                }
                let (x, p) = &self.ladder;
                let matrix = &x.matrix * a[i]
                    + &p.matrix * b[i]
                    + Array2::<Complex64>::eye(self.dim) * xi[i];
                Ok(FockOperator {
                    matrix,
                    unit: OperatorUnit::Length,
                })
            }
            HeisenbergEvolution::Matrix { .. } => Ok(self.matrix_sample(i)?.x.clone()),
        }
    }

    pub fn momentum_operator_at(&self, i: usize) -> Result<FockOperator> {
        match &self.evolution {
            HeisenbergEvolution::ClosedForm { a, b, xi } => {
                if i >= xi.len() {
                    return Err(Error::NotOnGrid {
                        t: self.grid.time(i),
                    });
                }
                // p̂_H = m dx̂_H/dt; ȧ = −ω₀² m b, ḃ = a/m
                let (x, p) = &self.ladder;
                let (m, w2) = (self.params.mass, self.params.omega0.powi(2));
                let xi_dot = self.xi_velocity(i);
                let matrix = &x.matrix * (-m * m * w2 * b[i])
                    + &p.matrix * a[i]
                    + Array2::<Complex64>::eye(self.dim) * (m * xi_dot);
                Ok(FockOperator {
                    matrix,
                    unit: OperatorUnit::Momentum,
                })
            }
            HeisenbergEvolution::Matrix { .. } => Ok(self.matrix_sample(i)?.p.clone()),
        }
    }

    fn xi_velocity(&self, i: usize) -> f64 {
        match &self.evolution {
            HeisenbergEvolution::ClosedForm { xi, .. } => {
                // central difference; only used for the momentum readout
                let h = self.grid.dt();
                let n = xi.len();
                match i {
                    0 => (-3.0 * xi[0] + 4.0 * xi[1] - xi[2]) / (2.0 * h),
                    _ if i + 1 == n => (3.0 * xi[n - 1] - 4.0 * xi[n - 2] + xi[n - 3]) / (2.0 * h),
                    _ => (xi[i + 1] - xi[i - 1]) / (2.0 * h),
                }
            }
            HeisenbergEvolution::Matrix { .. } => unreachable!(),
        }
    }

    /// x̂_H|0⟩ at grid index `i`.
    fn ground_column(&self, i: usize) -> Result<Vec<Complex64>> {
        match &self.evolution {
            HeisenbergEvolution::ClosedForm { a, b, xi } => {
                if i >= xi.len() {
                    return Err(Error::NotOnGrid {
                        t: self.grid.time(i),
                    });
                }
                let (x, p) = &self.ladder;
                let col = |m: &Array2<Complex64>| -> Vec<Complex64> { m.column(0).to_vec() };
                let (cx, cp) = (col(&x.matrix), col(&p.matrix));
                let mut c: Vec<Complex64> = cx
                    .iter()
                    .zip(&cp)
                    .map(|(u, v)| u * a[i] + v * b[i])
                    .collect();
                c[0] += xi[i];
                Ok(c)
            }
            HeisenbergEvolution::Matrix { .. } => {
                let s = self.matrix_sample(i)?;
                let col: ArrayView1<'_, Complex64> = s.x.matrix.column(0);
                Ok(col.to_vec())
            }
        }
    }

    /// ⟨0|x̂_H|0⟩ at grid index `i`.
    pub fn ground_mean_x_at(&self, i: usize) -> Result<f64> {
        Ok(self.ground_column(i)?[0].re)
    }

    /// ⟨0|x̂_H²|0⟩ = ‖x̂_H|0⟩‖² at grid index `i`.
    pub fn ground_moment_x2_at(&self, i: usize) -> Result<f64> {
        let c = self.ground_column(i)?;
        let total: f64 = c.iter().map(|z| z.norm_sqr()).sum();
        let top: f64 = c[self.dim - 2..].iter().map(|z| z.norm_sqr()).sum();
        let population = top / total;
        if population > TRUNCATION_LIMIT {
            return Err(Error::TruncationError { population });
        }
        Ok(total)
    }

    /// The c-number shift ξ at grid index `i`.
    pub fn xi_at(&self, i: usize) -> Result<f64> {
        match &self.evolution {
            HeisenbergEvolution::ClosedForm { xi, .. } => {
                xi.get(i).copied().ok_or(Error::NotOnGrid {
                    t: self.grid.time(i),
                })
            }
            HeisenbergEvolution::Matrix { .. } => Ok(self.matrix_sample(i)?.x.matrix[[0, 0]].re),
        }
    }
}

/// ⟨0|x̂_H²(t)|0⟩ for `t` on the solution's time grid.
pub fn ground_moment_x2(sol: &HeisenbergSolution, t: f64) -> Result<f64> {
    sol.ground_moment_x2_at(sol.index(t)?)
}

pub fn ground_mean_x(sol: &HeisenbergSolution, t: f64) -> Result<f64> {
    sol.ground_mean_x_at(sol.index(t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn natural() -> OscillatorParams {
        OscillatorParams::default()
    }

    #[test]
    fn ladder_examples() {
        let (x, p) = build_ladder_operators(&natural(), 16).unwrap();
        assert_abs_diff_eq!(x.matrix[[0, 1]].re, 0.5f64.sqrt(), epsilon = 1e-15);
        let x2 = x.matrix.dot(&x.matrix);
        assert_abs_diff_eq!(x2[[0, 0]].re, 0.5, epsilon = 1e-15);
        assert_eq!(x.matrix[[0, 0]], Complex64::default());
        assert!(x.max_hermiticity_error() < 1e-12);
        assert!(p.max_hermiticity_error() < 1e-12);
        assert!(commutator_defect(&x, &p, 1.0, 14) < 1e-10);
        // truncation spoils the last diagonal entry only
        let c = commutator(&x, &p);
        assert!((c[[15, 15]] - Complex64::new(0.0, 1.0)).norm() > 1.0);
        assert!(build_ladder_operators(&natural(), 8).is_err());
    }

    #[test]
    fn x01_matches_grid_quadrature() {
        // ∫ φ₀ x φ₁ with φ₁ = √2 x φ₀ (α = 1)
        let n = 6000;
        let l = 12.0;
        let dx = 2.0 * l / n as f64;
        let integral: f64 = (0..n)
            .map(|i| {
                let x = -l + i as f64 * dx;
                let phi0 = PI.powf(-0.25) * (-0.5 * x * x).exp();
                phi0 * x * (2.0f64.sqrt() * x * phi0)
            })
            .sum::<f64>()
            * dx;
        let (x, _) = build_ladder_operators(&natural(), 16).unwrap();
        assert_abs_diff_eq!(x.matrix[[0, 1]].re, integral, epsilon = 1e-12);
    }

    #[test]
    fn free_matrix_evolution_is_periodic() {
        let p = natural();
        let grid = TimeGrid::new(0.0, p.period(), 1257).unwrap();
        let sol = evolve_heisenberg(
            &p,
            &FieldModel::zero(),
            Default::default(),
            grid,
            64,
            HeisenbergRoute::Matrix { record_every: 1257 },
        )
        .unwrap();
        let (x0, p0) = build_ladder_operators(&p, 64).unwrap();
        let xt = sol.position_operator_at(grid.n_steps).unwrap();
        assert!(
            xt.frobenius_distance(&x0) < 1e-8,
            "{}",
            xt.frobenius_distance(&x0)
        );
        let pt = sol.momentum_operator_at(grid.n_steps).unwrap();
        assert!(commutator_defect(&xt, &pt, 1.0, 62) < 1e-9);
        assert!(pt.frobenius_distance(&p0) < 1e-8);
    }

    #[test]
    fn driven_shift_matches_classical_closed_form() {
        let p = natural();
        let field = FieldModel::monochromatic(1.0, 0.5, 0.0);
        let grid = TimeGrid::new(0.0, PI, 400).unwrap();
        for route in [
            HeisenbergRoute::ClosedForm,
            HeisenbergRoute::Matrix { record_every: 40 },
        ] {
            let sol = evolve_heisenberg(&p, &field, Default::default(), grid, 64, route).unwrap();
            assert_abs_diff_eq!(sol.xi_at(grid.n_steps).unwrap(), 4.0 / 3.0, epsilon = 1e-9);
            assert_abs_diff_eq!(ground_mean_x(&sol, PI).unwrap(), 4.0 / 3.0, epsilon = 1e-9);
            assert_abs_diff_eq!(
                ground_moment_x2(&sol, PI).unwrap(),
                0.5 + 16.0 / 9.0,
                epsilon = 1e-8
            );
        }
    }

    #[test]
    fn driven_matrix_preserves_commutator() {
        let p = natural();
        let field = FieldModel::monochromatic(0.7, 1.3, 0.2).with_damping(0.05);
        let grid = TimeGrid::new(0.0, 10.0, 1000).unwrap();
        let sol = evolve_heisenberg(
            &p,
            &field,
            Default::default(),
            grid,
            64,
            HeisenbergRoute::Matrix { record_every: 250 },
        )
        .unwrap();
        for i in sol.sample_indices() {
            let x = sol.position_operator_at(i).unwrap();
            let pm = sol.momentum_operator_at(i).unwrap();
            assert!(commutator_defect(&x, &pm, 1.0, 62) < 1e-9);
            assert!(x.max_hermiticity_error() < 1e-12);
        }
    }

    #[test]
    fn free_moment_is_vacuum_value() {
        let p = OscillatorParams {
            charge: 0.0,
            ..natural()
        };
        let grid = TimeGrid::new(0.0, 7.0, 100).unwrap();
        let sol = evolve_heisenberg(
            &p,
            &FieldModel::monochromatic(1.0, 0.5, 0.0),
            Default::default(),
            grid,
            64,
            HeisenbergRoute::ClosedForm,
        )
        .unwrap();
        for t in grid.times() {
            assert_abs_diff_eq!(ground_moment_x2(&sol, t).unwrap(), 0.5, epsilon = 1e-14);
        }
    }

    #[test]
    fn zero_crossing_recovers_vacuum_value() {
        // 4/3 (cos(t/2) − cos t) vanishes at t = 4π/3
        let p = natural();
        let t_star = 4.0 * PI / 3.0;
        let grid = TimeGrid::new(0.0, t_star, 800).unwrap();
        let sol = evolve_heisenberg(
            &p,
            &FieldModel::monochromatic(1.0, 0.5, 0.0),
            Default::default(),
            grid,
            64,
            HeisenbergRoute::ClosedForm,
        )
        .unwrap();
        assert_abs_diff_eq!(
            ground_moment_x2(&sol, t_star).unwrap(),
            0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn off_grid_time_rejected() {
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let sol = evolve_heisenberg(
            &natural(),
            &FieldModel::zero(),
            Default::default(),
            grid,
            16,
            HeisenbergRoute::ClosedForm,
        )
        .unwrap();
        assert!(matches!(
            ground_moment_x2(&sol, 0.123),
            Err(Error::NotOnGrid { .. })
        ));
        let coarse = TimeGrid::new(0.0, 10.0, 10).unwrap();
        assert!(matches!(
            evolve_heisenberg(
                &natural(),
                &FieldModel::zero(),
                Default::default(),
                coarse,
                16,
                HeisenbergRoute::ClosedForm
            ),
            Err(Error::StepTooCoarse { .. })
        ));
    }

    #[test]
    fn truncation_flagged_for_tiny_basis() {
        // a state that reaches the top levels: hand-built operator with weight at n = N−1
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let mut sol = evolve_heisenberg(
            &natural(),
            &FieldModel::zero(),
            Default::default(),
            grid,
            16,
            HeisenbergRoute::Matrix { record_every: 100 },
        )
        .unwrap();
        if let HeisenbergEvolution::Matrix { samples } = &mut sol.evolution {
            samples[0].x.matrix[[15, 0]] = Complex64::new(0.1, 0.0);
        }
        assert!(matches!(
            sol.ground_moment_x2_at(0),
            Err(Error::TruncationError { .. })
        ));
    }
}
