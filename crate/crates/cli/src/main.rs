//! `picture-lab`: run one equivalence scenario or sweep a parameter axis.
//!
//! Exit status is 0 when every verdict passes, 2 when a run completed but
//! the pictures disagree, and 1 on any error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use picture_lab_core::config::RunConfig;
use picture_lab_core::export;
use picture_lab_core::lab::run_scenario;
use picture_lab_core::sweep::{run_sweep, SweepAxis};
use tempfile::NamedTempFile;

#[derive(Parser)]
#[command(
    name = "picture-lab",
    version,
    about = "Schrodinger/Heisenberg equivalence lab for a driven oscillator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run {
        config: PathBuf,
        /// Output directory (overrides `[output] dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads. A single run is serial; accepted for symmetry with `sweep`.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Re-run the scenario once per value along one parameter axis.
    Sweep {
        config: PathBuf,
        /// One of e, gamma, dt, n_points, N_fock.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

enum Verdict {
    Pass,
    Fail,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, out, jobs } => run(&config, out, jobs),
        Command::Sweep {
            config,
            axis,
            values,
            out,
            jobs,
        } => sweep(&config, &axis, &values, out, jobs),
    };
    match result {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    RunConfig::load(path).with_context(|| format!("loading {}", path.display()))
}

/// Writes via a temp file in the target directory, then renames into place.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let target = dir.join(name);
    let mut tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target)
        .with_context(|| format!("writing {}", target.display()))?;
    Ok(target)
}

fn run(config: &Path, out: Option<PathBuf>, _jobs: usize) -> Result<Verdict> {
    let cfg = load(config)?;
    let opts = &cfg.output;
    let run = run_scenario(&cfg.scenario)?;
    let report = &run.report;
    let dir = out.unwrap_or_else(|| opts.dir.clone());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let mut files = Vec::new();
    if opts.series_csv {
        files.push(("series.csv".to_string(), export::series_csv(report)));
    }
    if opts.report_json {
        files.push(("report.json".to_string(), export::report_json(report)?));
    }
    if opts.trajectory_csv {
        files.push((
            "trajectory.csv".to_string(),
            export::trajectory_csv(&run.trajectory, cfg.scenario.sample_every),
        ));
    }
    if opts.heisenberg_csv {
        files.push(("heisenberg.csv".to_string(), export::heisenberg_csv(report)));
    }
    if opts.snapshots {
        files.push((
            "psi_initial.csv".to_string(),
            export::snapshot_csv(&run.initial_state),
        ));
        files.push((
            "psi_final.csv".to_string(),
            export::snapshot_csv(&run.final_state),
        ));
    }
    for (name, contents) in &files {
        let path = write_atomic(&dir, name, contents)?;
        if opts.verbosity >= 2 {
            println!("wrote {}", path.display());
        }
    }

    if opts.verbosity >= 1 {
        print!("{}", export::verdict_summary(report));
    }
    Ok(if report.passed() {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

fn parse_values(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| {
            v.parse::<f64>()
                .with_context(|| format!("bad sweep value `{v}`"))
        })
        .collect()
}

fn sweep(
    config: &Path,
    axis: &str,
    values: &str,
    out: Option<PathBuf>,
    jobs: usize,
) -> Result<Verdict> {
    let cfg = load(config)?;
    let axis: SweepAxis = axis.parse()?;
    let values = parse_values(values)?;
    let outcome = run_sweep(&cfg.scenario, axis, &values, jobs.max(1))?;
    let dir = out.unwrap_or_else(|| cfg.output.dir.clone());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    for (i, entry) in outcome.entries.iter().enumerate() {
        let name = format!("report_{axis}_{i:03}.json");
        write_atomic(&dir, &name, &export::report_json(&entry.report)?)?;
    }
    write_atomic(&dir, "summary.csv", &export::sweep_summary_csv(&outcome))?;

    if cfg.output.verbosity >= 1 {
        println!("sweep over {axis} ({} values)", outcome.entries.len());
        for row in outcome.summary() {
            println!(
                "[{}] {axis} = {:<10} sup|S-H| = {:.3e}  sup|<x>_S - q_c| = {:.3e}",
                if row.passed { "PASS" } else { "FAIL" },
                row.value,
                row.sup_discrepancy,
                row.sup_ehrenfest
            );
        }
    }
    Ok(if outcome.all_passed() {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}
