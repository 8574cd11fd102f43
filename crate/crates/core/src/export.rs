//! Artifact rendering. Every function returns the exact bytes to write, so
//! identical inputs give byte-identical files.

use std::fmt::Write as _;

use crate::classical::ClassicalTrajectory;
use crate::error::{Error, Result};
use crate::lab::EquivalenceReport;
use crate::schrodinger::GridWavefunction;
use crate::sweep::SweepOutcome;

pub const SERIES_HEADER: &str = "t,q_c,x2_schrodinger,x2_heisenberg,vacuum_term,residual_5_1";

/// Moment series in the fixed column order of [`SERIES_HEADER`].
pub fn series_csv(report: &EquivalenceReport) -> String {
    let s = &report.series;
    let mut out = String::with_capacity(64 * s.t.len());
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for k in 0..s.t.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            s.t[k],
            s.q_c[k],
            s.x2_schrodinger[k],
            s.x2_heisenberg[k],
            report.vacuum_term,
            s.residual_5_1[k]
        );
    }
    out
}

pub fn report_json(report: &EquivalenceReport) -> Result<String> {
    serde_json::to_string_pretty(report)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::Precondition(format!("report serialization: {e}")))
}

/// `t, q_c, qdot_c`, every `stride`-th sample plus the last.
pub fn trajectory_csv(traj: &ClassicalTrajectory, stride: usize) -> String {
    let stride = stride.max(1);
    let mut out = String::from("t,q_c,qdot_c\n");
    let n = traj.len();
    for i in (0..n).filter(|i| i % stride == 0 || i + 1 == n) {
        let _ = writeln!(out, "{},{},{}", traj.grid.time(i), traj.q[i], traj.qdot[i]);
    }
    out
}

/// Heisenberg moments `t, ⟨x̂_H⟩, ⟨x̂_H²⟩, ξ`.
pub fn heisenberg_csv(report: &EquivalenceReport) -> String {
    let s = &report.series;
    let mut out = String::from("t,x_heisenberg,x2_heisenberg,xi\n");
    for k in 0..s.t.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            s.t[k], s.x_heisenberg[k], s.x2_heisenberg[k], s.xi[k]
        );
    }
    out
}

/// Wavefunction snapshot `x, re, im, density`.
pub fn snapshot_csv(psi: &GridWavefunction) -> String {
    let mut out = String::from("x,re_psi,im_psi,density\n");
    for (x, c) in psi.grid.xs().zip(&psi.psi) {
        let _ = writeln!(out, "{},{},{},{}", x, c.re, c.im, c.norm_sqr());
    }
    out
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn sweep_summary_csv(outcome: &SweepOutcome) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{},sup_discrepancy,sup_ehrenfest,free_deviation,q_c_final,x_schrodinger_final,x2_schrodinger_final,x2_heisenberg_final,order_classical,order_split,passed",
        outcome.axis
    );
    for r in outcome.summary() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.value,
            r.sup_discrepancy,
            r.sup_ehrenfest,
            r.free_deviation,
            r.q_c_final,
            r.x_schrodinger_final,
            r.x2_schrodinger_final,
            r.x2_heisenberg_final,
            opt(r.order_classical),
            opt(r.order_split),
            r.passed
        );
    }
    out
}

/// Short human-readable verdict block.
pub fn verdict_summary(report: &EquivalenceReport) -> String {
    let s = &report.summary;
    let v = &report.verdicts;
    let tol = &report.scenario.tolerances;
    let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let mut out = String::new();
    let _ = writeln!(out, "scenario            {}", report.scenario.name);
    let _ = writeln!(out, "samples             {}", report.series.t.len());
    let _ = writeln!(out, "vacuum term         {:.12}", report.vacuum_term);
    let _ = writeln!(
        out,
        "<x^2>_S final       {:.12}",
        report.series.x2_schrodinger.last().unwrap_or(&f64::NAN)
    );
    let _ = writeln!(out, "<x^2>_H final       {:.12}", v.correct_value);
    let _ = writeln!(
        out,
        "[{}] pictures agree   sup|S-H| = {:.3e} (tol {:.0e})",
        mark(v.equivalent),
        s.sup_discrepancy,
        tol.equivalence
    );
    let _ = writeln!(
        out,
        "[{}] <x_H^2> != q_c^2 min|residual| = {:.3e}, sup|residual - vacuum| = {:.3e}",
        mark(v.identification_falsified),
        s.min_abs_residual,
        s.sup_residual_minus_vacuum
    );
    let _ = writeln!(
        out,
        "Ehrenfest           sup|<x>_S - q_c| = {:.3e}",
        s.sup_ehrenfest
    );
    let _ = writeln!(
        out,
        "decomposition       sup|S - q_c^2 - vac| = {:.3e}",
        s.sup_decomposition
    );
    let _ = writeln!(
        out,
        "flawed substitution {:.12} vs {:.12} (ratio {:.6})",
        v.flawed_value,
        v.correct_value,
        v.flawed_value / v.correct_value
    );
    out
}
