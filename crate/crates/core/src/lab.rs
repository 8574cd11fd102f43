//! Scenario runner: both pictures on a shared time grid, plus the
//! diagnostics for the "⟨x̂_H²⟩ = q_c²" identification.

use serde::{Deserialize, Serialize};

use crate::classical::{solve_trajectory, ClassicalTrajectory, InitialConditions};
use crate::error::{Error, Result};
use crate::heisenberg::{
    evolve_heisenberg, HeisenbergRoute, HeisenbergSolution, DEFAULT_DIMENSION,
};
use crate::model::{FieldModel, OscillatorParams, TimeGrid};
use crate::schrodinger::{
    exact_state, expectation_x2, ground_state, propagate_observed, GridWavefunction, PositionGrid,
    DEFAULT_POINTS,
};

/// Tolerances behind every verdict, echoed into the report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Cross-engine bound on sup_t |⟨x²⟩_S − ⟨x²⟩_H|.
    pub equivalence: f64,
    /// Bound for identities checked against a single engine (free value).
    pub engine: f64,
    /// Bound on the decomposition identity and the residual-equals-vacuum check.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            equivalence: 1e-5,
            engine: 1e-8,
            identity: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    #[default]
    ClosedForm,
    Matrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub params: OscillatorParams,
    pub field: FieldModel,
    pub ics: InitialConditions,
    /// When false the Heisenberg c-number shift starts from rest while the
    /// Schrödinger packet starts at `ics`.
    pub match_ics: bool,
    pub time: TimeGrid,
    /// Series are recorded every `sample_every` steps and at the final time.
    pub sample_every: usize,
    pub grid_points: usize,
    /// Grid half-width; sized from the trajectory when absent.
    pub half_width: Option<f64>,
    pub fock_dim: usize,
    pub route: Route,
    pub tolerances: Tolerances,
}

impl Scenario {
    /// Natural-unit scenario over `periods` oscillator periods with `steps_per_period` steps.
    pub fn natural(name: &str, field: FieldModel, periods: f64, steps_per_period: usize) -> Self {
        let params = OscillatorParams::default();
        let n = (periods * steps_per_period as f64).round() as usize;
        Self {
            name: name.to_owned(),
            params,
            field,
            ics: InitialConditions::default(),
            match_ics: true,
            time: TimeGrid {
                t0: 0.0,
                t1: periods * params.period(),
                n_steps: n.max(1),
            },
            sample_every: (steps_per_period / 20).max(1),
            grid_points: DEFAULT_POINTS,
            half_width: None,
            fock_dim: DEFAULT_DIMENSION,
            route: Route::ClosedForm,
            tolerances: Tolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.field.validate()?;
        InitialConditions::new(self.ics.q0, self.ics.v0)?;
        TimeGrid::new(self.time.t0, self.time.t1, self.time.n_steps)?;
        if self.sample_every == 0 {
            return Err(Error::InvalidParams(
                "sample_every must be at least 1".into(),
            ));
        }
        let tol = &self.tolerances;
        if ![tol.equivalence, tol.engine, tol.identity]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0)
        {
            return Err(Error::InvalidParams("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn heisenberg_ics(&self) -> InitialConditions {
        if self.match_ics {
            self.ics
        } else {
            InitialConditions::default()
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    pub q_c: Vec<f64>,
    pub x_schrodinger: Vec<f64>,
    pub x2_schrodinger: Vec<f64>,
    pub x_heisenberg: Vec<f64>,
    pub x2_heisenberg: Vec<f64>,
    /// c-number shift of x̂_H.
    pub xi: Vec<f64>,
    /// ⟨x̂_H²⟩ − q_c².
    pub residual_5_1: Vec<f64>,
    /// ∫φ₀x²φ₀ + ⟨x̂_H²⟩, the value produced by the flawed substitution.
    pub flawed_x2: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// sup_t |⟨x²⟩_S − ⟨x²⟩_H|.
    pub sup_discrepancy: f64,
    /// sup_t |⟨x⟩_S − q_c|.
    pub sup_ehrenfest: f64,
    /// sup_t |⟨x⟩_H − q_c|.
    pub sup_heisenberg_mean: f64,
    /// sup_t |⟨x²⟩_S − q_c² − vacuum|.
    pub sup_decomposition: f64,
    /// min_t |⟨x̂_H²⟩ − q_c²|.
    pub min_abs_residual: f64,
    /// sup_t |⟨x̂_H²⟩ − q_c² − vacuum|.
    pub sup_residual_minus_vacuum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdicts {
    pub equivalent: bool,
    /// True when ⟨x̂_H²⟩ ≠ q_c² at every sample.
    pub identification_falsified: bool,
    /// Flawed value and the engines' value at the final sample.
    pub flawed_value: f64,
    pub correct_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub scenario: Scenario,
    pub position_grid: PositionGrid,
    /// ∫φ₀* x² φ₀ evaluated on the grid.
    pub vacuum_term: f64,
    pub series: Series,
    pub summary: Summary,
    pub verdicts: Verdicts,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.verdicts.equivalent && self.verdicts.identification_falsified
    }

    fn sample(&self, t: f64) -> Result<usize> {
        let i = self
            .scenario
            .time
            .index_of(t)
            .ok_or(Error::NotOnGrid { t })?;
        let target = self.scenario.time.time(i);
        self.series
            .t
            .iter()
            .position(|s| *s == target)
            .ok_or(Error::NotOnGrid { t })
    }
}

/// Everything a scenario run produces; the report plus the raw engine outputs.
pub struct ScenarioRun {
    pub report: EquivalenceReport,
    pub trajectory: ClassicalTrajectory,
    pub heisenberg: HeisenbergSolution,
    pub initial_state: GridWavefunction,
    pub final_state: GridWavefunction,
}

pub fn run_scenario(s: &Scenario) -> Result<ScenarioRun> {
    run_inner(s).map_err(|e| e.in_scenario(&s.name))
}

pub fn run_equivalence(s: &Scenario) -> Result<EquivalenceReport> {
    run_scenario(s).map(|run| run.report)
}

fn run_inner(s: &Scenario) -> Result<ScenarioRun> {
    s.validate()?;
    let trajectory = solve_trajectory(&s.params, &s.field, s.ics, s.time)?;
    let route = match s.route {
        Route::ClosedForm => HeisenbergRoute::ClosedForm,
        Route::Matrix => HeisenbergRoute::Matrix {
            record_every: s.sample_every,
        },
    };
    let heisenberg = evolve_heisenberg(
        &s.params,
        &s.field,
        s.heisenberg_ics(),
        s.time,
        s.fock_dim,
        route,
    )?;

    let grid = match s.half_width {
        Some(l) => PositionGrid::new(l, s.grid_points)?,
        None => PositionGrid::for_displacement(&s.params, trajectory.max_abs_q(), s.grid_points)?,
    };
    let vacuum_term = expectation_x2(&ground_state(&s.params, grid)?)?;
    let initial_state = exact_state(&trajectory, grid, 0)?;

    let mut series = Series::default();
    let mut failure = None;
    let final_state = propagate_observed(
        &initial_state,
        &s.params,
        trajectory.effective_force(),
        s.time,
        s.sample_every,
        |i, t, psi| {
            if failure.is_some() {
                return;
            }
            let mut sample = || -> Result<()> {
                let q = trajectory.q[i];
                let x2_s = expectation_x2(psi)?;
                let x2_h = heisenberg.ground_moment_x2_at(i)?;
                series.t.push(t);
                series.q_c.push(q);
                series.x_schrodinger.push(psi.mean_x());
                series.x2_schrodinger.push(x2_s);
                series.x_heisenberg.push(heisenberg.ground_mean_x_at(i)?);
                series.x2_heisenberg.push(x2_h);
                series.xi.push(heisenberg.xi_at(i)?);
                series.residual_5_1.push(x2_h - q * q);
                series
                    .flawed_x2
                    .push(flawed_pipeline_value(vacuum_term, x2_h));
                Ok(())
            };
            if let Err(e) = sample() {
                failure = Some(e);
            }
        },
    )?;
    if let Some(e) = failure {
        return Err(e);
    }

    let sup = |f: &dyn Fn(usize) -> f64| (0..series.t.len()).map(f).fold(0.0, f64::max);
    let summary = Summary {
        sup_discrepancy: sup(&|k| (series.x2_schrodinger[k] - series.x2_heisenberg[k]).abs()),
        sup_ehrenfest: sup(&|k| (series.x_schrodinger[k] - series.q_c[k]).abs()),
        sup_heisenberg_mean: sup(&|k| (series.x_heisenberg[k] - series.q_c[k]).abs()),
        sup_decomposition: sup(&|k| {
            (series.x2_schrodinger[k] - series.q_c[k].powi(2) - vacuum_term).abs()
        }),
        min_abs_residual: series
            .residual_5_1
            .iter()
            .map(|r| r.abs())
            .fold(f64::INFINITY, f64::min),
        sup_residual_minus_vacuum: sup(&|k| (series.residual_5_1[k] - vacuum_term).abs()),
    };
    let last = series.t.len() - 1;
    let verdicts = Verdicts {
        equivalent: summary.sup_discrepancy < s.tolerances.equivalence,
        identification_falsified: summary.min_abs_residual > s.tolerances.identity,
        flawed_value: series.flawed_x2[last],
        correct_value: series.x2_heisenberg[last],
    };

    Ok(ScenarioRun {
        report: EquivalenceReport {
            scenario: s.clone(),
            position_grid: grid,
            vacuum_term,
            series,
            summary,
            verdicts,
        },
        trajectory,
        heisenberg,
        initial_state,
        final_state,
    })
}

/// ⟨x̂_H²(t)⟩ − q_c²(t) at a recorded sample time.
pub fn flawed_identification_residual(report: &EquivalenceReport, t: f64) -> Result<f64> {
    let k = report.sample(t)?;
    Ok(report.series.residual_5_1[k])
}

/// The flawed pipeline: substitute ⟨x̂_H²⟩ for q_c² in the shifted
/// decomposition, giving `vacuum_term + heisenberg_x2`.
pub fn flawed_pipeline_value(vacuum_term: f64, heisenberg_x2: f64) -> f64 {
    vacuum_term + heisenberg_x2
}

/// Run `base` once per charge in `charges`. The list must contain 0.
pub fn free_limit_sweep(
    charges: &[f64],
    base: &Scenario,
    jobs: usize,
) -> Result<Vec<EquivalenceReport>> {
    if !charges.contains(&0.0) {
        return Err(Error::Precondition(
            "free-limit sweep needs the uncharged case e = 0".into(),
        ));
    }
    let scenarios: Vec<Scenario> = charges
        .iter()
        .map(|&e| {
            let mut s = base.clone();
            s.params.charge = e;
            s.name = format!("{}[e={e}]", base.name);
            s
        })
        .collect();
    crate::sweep::run_all(&scenarios, jobs)
}

/// sup_t |⟨x²⟩_S − ∫φ₀x²φ₀|, the distance from the free result.
pub fn free_deviation(report: &EquivalenceReport) -> f64 {
    report
        .series
        .x2_schrodinger
        .iter()
        .map(|x2| (x2 - report.vacuum_term).abs())
        .fold(0.0, f64::max)
}

/// True when the uncharged run sits on the free value within the engine
/// tolerance and the deviation grows monotonically with |e|.
pub fn free_limit_converges(reports: &[EquivalenceReport]) -> bool {
    let mut by_charge: Vec<(f64, f64, f64)> = reports
        .iter()
        .map(|r| {
            (
                r.scenario.params.charge.abs(),
                free_deviation(r),
                r.scenario.tolerances.engine,
            )
        })
        .collect();
    by_charge.sort_by(|a, b| a.0.total_cmp(&b.0));
    let free_ok = by_charge
        .first()
        .is_some_and(|(e, dev, tol)| *e == 0.0 && dev < tol);
    free_ok && by_charge.windows(2).all(|w| w[1].1 >= w[0].1)
}
