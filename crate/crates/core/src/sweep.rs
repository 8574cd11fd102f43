//! One-parameter sweeps over a base scenario.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::convergence::{richardson_order_steps, sup_difference};
use crate::error::{Error, Result};
use crate::lab::{free_deviation, run_equivalence, EquivalenceReport, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepAxis {
    Charge,
    Gamma,
    Dt,
    Points,
    Fock,
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "e" | "charge" => Ok(Self::Charge),
            "gamma" => Ok(Self::Gamma),
            "dt" => Ok(Self::Dt),
            "n_points" => Ok(Self::Points),
            "N_fock" | "n_fock" => Ok(Self::Fock),
            other => Err(Error::config(
                "axis",
                format!("unknown sweep axis `{other}` (expected e, gamma, dt, n_points, N_fock)"),
            )),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Charge => "e",
            Self::Gamma => "gamma",
            Self::Dt => "dt",
            Self::Points => "n_points",
            Self::Fock => "N_fock",
        })
    }
}

fn as_count(axis: SweepAxis, value: f64) -> Result<usize> {
    if value.fract() != 0.0 || value < 1.0 {
        return Err(Error::config(
            axis.to_string(),
            format!("sweep value {value} must be a positive integer"),
        ));
    }
    Ok(value as usize)
}

/// `base` with the swept parameter replaced by `value`.
pub fn apply(axis: SweepAxis, base: &Scenario, value: f64) -> Result<Scenario> {
    let mut s = base.clone();
    s.name = format!("{}[{axis}={value}]", base.name);
    match axis {
        SweepAxis::Charge => s.params.charge = value,
        SweepAxis::Gamma => s.field.gamma = value,
        SweepAxis::Dt => {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config("dt", "sweep values must be positive"));
            }
            // Snap to a whole number of steps per sampling interval so every
            // entry of a dt sweep samples at the same times.
            let span = base.time.t1 - base.time.t0;
            let intervals = (base.time.n_steps as f64 / base.sample_every as f64)
                .round()
                .max(1.0);
            let per_interval = (span / intervals / value).round().max(1.0);
            s.time.n_steps = (per_interval * intervals) as usize;
            s.sample_every = per_interval as usize;
        }
        SweepAxis::Points => s.grid_points = as_count(axis, value)?,
        SweepAxis::Fock => s.fock_dim = as_count(axis, value)?,
    }
    Ok(s)
}

/// Run every scenario, on up to `jobs` worker threads. Output order follows input order.
pub fn run_all(scenarios: &[Scenario], jobs: usize) -> Result<Vec<EquivalenceReport>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if jobs > 1 {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Error::Precondition(format!("worker pool: {e}")))?;
            return pool.install(|| scenarios.par_iter().map(run_equivalence).collect());
        }
    }
    let _ = jobs;
    scenarios.iter().map(run_equivalence).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub value: f64,
    pub report: EquivalenceReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub axis: SweepAxis,
    pub entries: Vec<SweepEntry>,
}

/// One row of the convergence summary table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub value: f64,
    pub sup_discrepancy: f64,
    pub sup_ehrenfest: f64,
    pub free_deviation: f64,
    pub q_c_final: f64,
    pub x_schrodinger_final: f64,
    pub x2_schrodinger_final: f64,
    pub x2_heisenberg_final: f64,
    /// Richardson order of the classical trajectory from this and the two
    /// preceding dt values (dt sweeps only).
    pub order_classical: Option<f64>,
    /// Same for the Schrödinger mean position.
    pub order_split: Option<f64>,
    pub passed: bool,
}

pub fn run_sweep(
    base: &Scenario,
    axis: SweepAxis,
    values: &[f64],
    jobs: usize,
) -> Result<SweepOutcome> {
    if values.is_empty() {
        return Err(Error::Precondition("no sweep values".into()));
    }
    let scenarios = values
        .iter()
        .map(|&v| apply(axis, base, v))
        .collect::<Result<Vec<_>>>()?;
    let reports = run_all(&scenarios, jobs)?;
    Ok(SweepOutcome {
        axis,
        entries: values
            .iter()
            .zip(reports)
            .map(|(&value, report)| SweepEntry { value, report })
            .collect(),
    })
}

impl SweepOutcome {
    pub fn summary(&self) -> Vec<SummaryRow> {
        let last = |v: &[f64]| v.last().copied().unwrap_or(f64::NAN);
        let diff = |a: &EquivalenceReport,
                    b: &EquivalenceReport,
                    pick: fn(&EquivalenceReport) -> &[f64]| {
            let (x, y) = (pick(a), pick(b));
            if x.len() == y.len() {
                sup_difference(x, y)
            } else {
                (last(x) - last(y)).abs()
            }
        };
        self.entries
            .iter()
            .enumerate()
            .map(|(k, entry)| {
                let r = &entry.report;
                let (mut order_classical, mut order_split) = (None, None);
                if self.axis == SweepAxis::Dt && k >= 2 {
                    let (a, b, c) = (&self.entries[k - 2], &self.entries[k - 1], &self.entries[k]);
                    let h = [
                        a.report.scenario.time.dt(),
                        b.report.scenario.time.dt(),
                        c.report.scenario.time.dt(),
                    ];
                    fn q(r: &EquivalenceReport) -> &[f64] {
                        &r.series.q_c
                    }
                    fn x(r: &EquivalenceReport) -> &[f64] {
                        &r.series.x_schrodinger
                    }
                    order_classical = richardson_order_steps(
                        h,
                        diff(&a.report, &b.report, q),
                        diff(&b.report, &c.report, q),
                    );
                    order_split = richardson_order_steps(
                        h,
                        diff(&a.report, &b.report, x),
                        diff(&b.report, &c.report, x),
                    );
                }
                SummaryRow {
                    value: entry.value,
                    sup_discrepancy: r.summary.sup_discrepancy,
                    sup_ehrenfest: r.summary.sup_ehrenfest,
                    free_deviation: free_deviation(r),
                    q_c_final: last(&r.series.q_c),
                    x_schrodinger_final: last(&r.series.x_schrodinger),
                    x2_schrodinger_final: last(&r.series.x2_schrodinger),
                    x2_heisenberg_final: last(&r.series.x2_heisenberg),
                    order_classical,
                    order_split,
                    passed: r.passed(),
                }
            })
            .collect()
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.report.passed())
    }
}
