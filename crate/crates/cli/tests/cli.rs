use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_picture-lab"))
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn picture-lab")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SMALL: &str = r#"
name = "small"
[field]
kind = "monochromatic"
amplitude = 0.5
frequency = 0.7
[time]
t1 = 3.0
steps = 3000
sample_every = 100
[grid]
points = 512
[output]
heisenberg_csv = true
trajectory_csv = true
snapshots = true
"#;

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn free_config_passes() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "run",
        bundled("free.cfg").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS] pictures agree"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn driven_config_writes_series_columns() {
    let dir = TempDir::new().unwrap();
    let out = run(&[
        "run",
        bundled("driven.cfg").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let csv = fs::read_to_string(dir.path().join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,q_c,x2_schrodinger,x2_heisenberg,vacuum_term,residual_5_1"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 201);
    for r in &rows {
        assert_eq!(r.len(), 6);
        assert!((r[5] - 0.5).abs() < 1e-12);
        assert!((r[2] - r[3]).abs() < 1e-5);
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(json["verdicts"]["equivalent"], true);
}

#[test]
fn every_bundled_config_loads() {
    for name in ["free.cfg", "driven.cfg", "damped.cfg", "modesum.cfg"] {
        picture_lab_core::config::RunConfig::load(&bundled(name))
            .unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn negative_mass_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "bad.cfg",
        &SMALL.replace("[field]", "[oscillator]\nmass = -1.0\n[field]"),
    );
    let out = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(
        stderr(&out).contains("mass must be positive"),
        "{}",
        stderr(&out)
    );
    assert!(!dir.path().join("series.csv").exists());
}

#[test]
fn unknown_key_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "bad.cfg",
        &SMALL.replace("[grid]", "[grid]\nwidth = 3"),
    );
    let out = run(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("width"), "{}", stderr(&out));
}

#[test]
fn missing_config_is_an_error() {
    let out = run(&["run", "/nonexistent/picture-lab.cfg"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn coarse_step_fails_equivalence() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(bundled("driven.cfg"))
        .unwrap()
        .replace("steps = 100000", "steps = 3000")
        .replace("sample_every = 500", "sample_every = 15");
    let cfg = write_config(&dir, "coarse.cfg", &text);
    let out = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL] pictures agree"));
    // artifacts are still written so the failure can be inspected
    assert!(dir.path().join("series.csv").exists());
}

#[test]
fn empty_sweep_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.cfg", SMALL);
    let out = run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--axis",
        "e",
        "--values",
        "",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no sweep values"), "{}", stderr(&out));
}

#[test]
fn unknown_axis_is_an_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.cfg", SMALL);
    let out = run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--axis",
        "mass",
        "--values",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_writes_reports_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.cfg", SMALL);
    let out_dir = dir.path().join("sweep");
    let out = run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--axis",
        "e",
        "--values",
        "0,0.5,1",
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("e,"));
    for i in 0..3 {
        assert!(out_dir.join(format!("report_e_{i:03}.json")).exists());
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn repeated_runs_are_byte_identical_and_leave_no_temp_files() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.cfg", SMALL);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let out = run(&["run", cfg.to_str().unwrap(), "--out", d.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    }
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    let names: Vec<&str> = sa.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(
        names,
        [
            "heisenberg.csv",
            "psi_final.csv",
            "psi_initial.csv",
            "report.json",
            "series.csv",
            "trajectory.csv"
        ]
    );
    assert_eq!(sa, sb);
}

#[test]
fn rerun_overwrites_in_place() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.cfg", SMALL);
    let out_dir = dir.path().join("o");
    fs::create_dir_all(&out_dir).unwrap();
    fs::write(out_dir.join("series.csv"), "stale").unwrap();
    let out = run(&[
        "run",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fs::read_to_string(out_dir.join("series.csv"))
        .unwrap()
        .starts_with("t,q_c,"));
}

#[test]
fn dt_sweep_reports_convergence_orders() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.cfg", SMALL);
    let out_dir = dir.path().join("dt");
    let out = run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--axis",
        "dt",
        "--values",
        "0.02,0.01,0.005",
        "--out",
        out_dir.to_str().unwrap(),
        "--jobs",
        "3",
    ]);
    // the coarsest entries miss the equivalence tolerance by design
    assert!(matches!(out.status.code(), Some(0 | 2)), "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let header: Vec<&str> = summary.lines().next().unwrap().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name).unwrap();
    let last: Vec<&str> = summary.lines().last().unwrap().split(',').collect();
    let classical: f64 = last[col("order_classical")].parse().unwrap();
    let split: f64 = last[col("order_split")].parse().unwrap();
    assert!((classical - 4.0).abs() < 0.3, "{classical}");
    assert!((split - 2.0).abs() < 0.3, "{split}");
}

#[test]
fn failed_sweep_creates_no_output_directory() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "small.cfg", SMALL);
    let out_dir = dir.path().join("never");
    let out = run(&[
        "sweep",
        cfg.to_str().unwrap(),
        "--axis",
        "e",
        "--values",
        "",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out_dir.exists());
}
