//! Run configuration: a sectioned key-value file (TOML syntax).
//!
//! ```toml
//! name = "driven"
//!
//! [oscillator]          # all optional, natural units by default
//! mass = 1.0
//! omega0 = 1.0
//! charge = 1.0
//! hbar = 1.0
//!
//! [field]
//! kind = "monochromatic"   # zero | monochromatic | mode-sum
//! amplitude = 1.0
//! frequency = 0.5
//! phase = 0.0
//! damping = 0.0
//!
//! [initial]
//! q0 = 0.0
//! v0 = 0.0
//! match_heisenberg = true
//!
//! [time]
//! periods = 10          # or t1 = ...
//! steps = 62832
//! sample_every = 200
//!
//! [grid]
//! points = 2048
//!
//! [fock]
//! dimension = 64
//! route = "closed-form"  # or "matrix"
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Mode sums take either explicit `modes = [[amplitude, omega, phase], ...]`
//! or `count`, `band = [lo, hi]`, `amplitude` and `seed`. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::classical::{max_stable_step, InitialConditions};
use crate::error::{Error, Result};
use crate::heisenberg::{DEFAULT_DIMENSION, MIN_DIMENSION};
use crate::lab::{Route, Scenario, Tolerances};
use crate::model::{Drive, FieldModel, Mode, OscillatorParams, TimeGrid};
use crate::schrodinger::{DEFAULT_POINTS, MIN_POINTS};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: Option<String>,
    #[serde(default)]
    oscillator: RawOscillator,
    #[serde(default)]
    field: RawField,
    #[serde(default)]
    initial: RawInitial,
    time: RawTime,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    fock: RawFock,
    tolerances: Option<Tolerances>,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOscillator {
    mass: Option<f64>,
    omega0: Option<f64>,
    charge: Option<f64>,
    hbar: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    kind: Option<String>,
    amplitude: Option<f64>,
    frequency: Option<f64>,
    phase: Option<f64>,
    damping: Option<f64>,
    modes: Option<Vec<[f64; 3]>>,
    count: Option<usize>,
    band: Option<[f64; 2]>,
    seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    q0: Option<f64>,
    v0: Option<f64>,
    match_heisenberg: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    t0: Option<f64>,
    t1: Option<f64>,
    periods: Option<f64>,
    steps: usize,
    sample_every: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    points: Option<usize>,
    half_width: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFock {
    dimension: Option<usize>,
    route: Option<Route>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    series_csv: Option<bool>,
    report_json: Option<bool>,
    trajectory_csv: Option<bool>,
    heisenberg_csv: Option<bool>,
    snapshots: Option<bool>,
    verbosity: Option<u8>,
}

/// Which artifacts a run writes, and where.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub series_csv: bool,
    pub report_json: bool,
    pub trajectory_csv: bool,
    pub heisenberg_csv: bool,
    pub snapshots: bool,
    pub verbosity: u8,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            series_csv: true,
            report_json: true,
            trajectory_csv: false,
            heisenberg_csv: false,
            snapshots: false,
            verbosity: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub output: OutputOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
        let default_name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "scenario".into());
        Self::parse_named(&text, &default_name)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_named(text, "scenario")
    }

    fn parse_named(text: &str, default_name: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| {
            let msg = e.message().to_owned();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<syntax>")
                .to_owned();
            Error::config(key, msg)
        })?;
        raw.build(default_name)
    }
}

fn positive(key: &str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::config(
            key,
            format!("{} must be positive", leaf(key)),
        ))
    }
}

fn finite(key: &str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::config(key, format!("{} must be finite", leaf(key))))
    }
}

fn leaf(key: &str) -> &str {
    key.rsplit('.').next().unwrap_or(key)
}

impl RawField {
    fn reject(&self, kind: &str, keys: &[(&str, bool)]) -> Result<()> {
        for (key, present) in keys {
            if *present {
                return Err(Error::config(
                    format!("field.{key}"),
                    format!("not used by field kind `{kind}`"),
                ));
            }
        }
        Ok(())
    }

    fn build(&self) -> Result<FieldModel> {
        let gamma = match self.damping {
            Some(g) if !(g.is_finite() && g >= 0.0) => {
                return Err(Error::config(
                    "field.damping",
                    "damping must be non-negative",
                ))
            }
            Some(g) => g,
            None => 0.0,
        };
        let kind = self.kind.as_deref().unwrap_or("zero");
        let explicit = self.modes.is_some();
        let generated = self.count.is_some() || self.band.is_some() || self.seed.is_some();
        let drive = match kind {
            "zero" => {
                self.reject(
                    kind,
                    &[
                        ("amplitude", self.amplitude.is_some()),
                        ("frequency", self.frequency.is_some()),
                        ("phase", self.phase.is_some()),
                        ("modes", explicit),
                        ("count", self.count.is_some()),
                        ("band", self.band.is_some()),
                        ("seed", self.seed.is_some()),
                    ],
                )?;
                Drive::Zero
            }
            "monochromatic" => {
                self.reject(
                    kind,
                    &[
                        ("modes", explicit),
                        ("count", self.count.is_some()),
                        ("band", self.band.is_some()),
                        ("seed", self.seed.is_some()),
                    ],
                )?;
                let amplitude = self.amplitude.ok_or_else(|| {
                    Error::config("field.amplitude", "required for monochromatic drive")
                })?;
                let omega = self.frequency.ok_or_else(|| {
                    Error::config("field.frequency", "required for monochromatic drive")
                })?;
                Drive::Monochromatic {
                    amplitude: finite("field.amplitude", amplitude)?,
                    omega: positive("field.frequency", omega)?,
                    phase: finite("field.phase", self.phase.unwrap_or(0.0))?,
                }
            }
            "mode-sum" => {
                self.reject(
                    kind,
                    &[
                        ("frequency", self.frequency.is_some()),
                        ("phase", self.phase.is_some()),
                    ],
                )?;
                match (explicit, generated) {
                    (true, true) => {
                        return Err(Error::config(
                            "field.modes",
                            "give either explicit modes or count/band/seed, not both",
                        ))
                    }
                    (true, false) => {
                        self.reject(kind, &[("amplitude", self.amplitude.is_some())])?;
                        let modes = self.modes.as_ref().unwrap();
                        if modes.is_empty() {
                            return Err(Error::config("field.modes", "at least one mode required"));
                        }
                        let modes = modes
                            .iter()
                            .map(|[a, w, p]| {
                                Ok(Mode {
                                    amplitude: finite("field.modes", *a)?,
                                    omega: positive("field.modes", *w)?,
                                    phase: finite("field.modes", *p)?,
                                })
                            })
                            .collect::<Result<_>>()?;
                        Drive::ModeSum { modes, seed: None }
                    }
                    _ => {
                        let count = self.count.ok_or_else(|| {
                            Error::config("field.count", "required for a generated mode sum")
                        })?;
                        let [lo, hi] = self.band.ok_or_else(|| {
                            Error::config("field.band", "required for a generated mode sum")
                        })?;
                        let amplitude = self.amplitude.ok_or_else(|| {
                            Error::config("field.amplitude", "required for a generated mode sum")
                        })?;
                        let seed = self.seed.ok_or_else(|| {
                            Error::config("field.seed", "required for a generated mode sum")
                        })?;
                        Drive::seeded_mode_sum(
                            count,
                            finite("field.amplitude", amplitude)?,
                            (lo, hi),
                            seed,
                        )
                        .map_err(|e| Error::config("field.band", e.to_string()))?
                    }
                }
            }
            other => {
                return Err(Error::config(
                    "field.kind",
                    format!(
                        "unknown field kind `{other}` (expected zero, monochromatic, mode-sum)"
                    ),
                ))
            }
        };
        Ok(FieldModel { drive, gamma })
    }
}

impl RawConfig {
    fn build(self, default_name: &str) -> Result<RunConfig> {
        let o = &self.oscillator;
        let params = OscillatorParams {
            mass: positive("oscillator.mass", o.mass.unwrap_or(1.0))?,
            omega0: positive("oscillator.omega0", o.omega0.unwrap_or(1.0))?,
            charge: finite("oscillator.charge", o.charge.unwrap_or(1.0))?,
            hbar: positive("oscillator.hbar", o.hbar.unwrap_or(1.0))?,
        };
        params
            .validate()
            .map_err(|e| Error::config("oscillator", e.to_string()))?;
        let field = self.field.build()?;

        let ics = InitialConditions {
            q0: finite("initial.q0", self.initial.q0.unwrap_or(0.0))?,
            v0: finite("initial.v0", self.initial.v0.unwrap_or(0.0))?,
        };

        let tm = &self.time;
        let t0 = finite("time.t0", tm.t0.unwrap_or(0.0))?;
        let t1 = match (tm.t1, tm.periods) {
            (Some(_), Some(_)) => {
                return Err(Error::config(
                    "time.periods",
                    "give either t1 or periods, not both",
                ))
            }
            (Some(t1), None) => finite("time.t1", t1)?,
            (None, Some(p)) => t0 + positive("time.periods", p)? * params.period(),
            (None, None) => {
                return Err(Error::config("time.t1", "one of t1 or periods is required"))
            }
        };
        if t1 <= t0 {
            return Err(Error::config("time.t1", "t1 must exceed t0"));
        }
        if tm.steps == 0 {
            return Err(Error::config("time.steps", "steps must be at least 1"));
        }
        let time = TimeGrid::new(t0, t1, tm.steps)?;
        let limit = max_stable_step(&params, &field);
        if time.dt() > limit * (1.0 + 1e-12) {
            return Err(Error::config(
                "time.steps",
                format!("step {} exceeds the stability limit {limit}", time.dt()),
            ));
        }
        let sample_every = tm.sample_every.unwrap_or(1);
        if sample_every == 0 {
            return Err(Error::config(
                "time.sample_every",
                "sample_every must be at least 1",
            ));
        }

        let grid_points = self.grid.points.unwrap_or(DEFAULT_POINTS);
        if grid_points < MIN_POINTS || !grid_points.is_power_of_two() {
            return Err(Error::config(
                "grid.points",
                format!("points must be a power of two >= {MIN_POINTS}"),
            ));
        }
        let half_width = self
            .grid
            .half_width
            .map(|l| positive("grid.half_width", l))
            .transpose()?;
        let fock_dim = self.fock.dimension.unwrap_or(DEFAULT_DIMENSION);
        if fock_dim < MIN_DIMENSION {
            return Err(Error::config(
                "fock.dimension",
                format!("dimension must be at least {MIN_DIMENSION}"),
            ));
        }
        let tolerances = self.tolerances.unwrap_or_default();
        for (key, v) in [
            ("tolerances.equivalence", tolerances.equivalence),
            ("tolerances.engine", tolerances.engine),
            ("tolerances.identity", tolerances.identity),
        ] {
            positive(key, v)?;
        }

        let defaults = OutputOptions::default();
        let out = self.output;
        let output = OutputOptions {
            dir: out.dir.unwrap_or(defaults.dir),
            series_csv: out.series_csv.unwrap_or(defaults.series_csv),
            report_json: out.report_json.unwrap_or(defaults.report_json),
            trajectory_csv: out.trajectory_csv.unwrap_or(defaults.trajectory_csv),
            heisenberg_csv: out.heisenberg_csv.unwrap_or(defaults.heisenberg_csv),
            snapshots: out.snapshots.unwrap_or(defaults.snapshots),
            verbosity: out.verbosity.unwrap_or(defaults.verbosity),
        };

        Ok(RunConfig {
            scenario: Scenario {
                name: self.name.unwrap_or_else(|| default_name.to_owned()),
                params,
                field,
                ics,
                match_ics: self.initial.match_heisenberg.unwrap_or(true),
                time,
                sample_every,
                grid_points,
                half_width,
                fock_dim,
                route: self.fock.route.unwrap_or_default(),
                tolerances,
            },
            output,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DRIVEN: &str = r#"
name = "driven"
[field]
kind = "monochromatic"
amplitude = 1.0
frequency = 0.5
[time]
periods = 10
steps = 20000
sample_every = 100
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = RunConfig::parse(DRIVEN).unwrap();
        let s = &cfg.scenario;
        assert_eq!(s.name, "driven");
        assert_eq!(s.params, OscillatorParams::default());
        assert_eq!(s.field, FieldModel::monochromatic(1.0, 0.5, 0.0));
        assert_eq!(s.time.t1, 20.0 * std::f64::consts::PI);
        assert_eq!(s.grid_points, DEFAULT_POINTS);
        assert!(s.match_ics);
        assert_eq!(cfg.output, OutputOptions::default());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse(&format!("{DRIVEN}\n[grid]\npionts = 1024\n")).unwrap_err();
        match err {
            Error::ConfigInvalid { key, .. } => assert_eq!(key, "pionts"),
            other => panic!("{other}"),
        }
        let err = RunConfig::parse(&DRIVEN.replace("[time]", "colour = 1\n[time]")).unwrap_err();
        assert!(err.to_string().contains("colour"), "{err}");
    }

    #[test]
    fn negative_mass_rejected() {
        let err = RunConfig::parse(
            &format!("[oscillator]\nmass = -1.0\n{DRIVEN}").replace("name = \"driven\"", ""),
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::ConfigInvalid {
                key: "oscillator.mass".into(),
                message: "mass must be positive".into()
            }
        );
    }

    #[test]
    fn field_kinds_validated() {
        let zero_with_amp = DRIVEN.replace("kind = \"monochromatic\"", "kind = \"zero\"");
        let err = RunConfig::parse(&zero_with_amp).unwrap_err();
        assert!(err.to_string().contains("field.amplitude"), "{err}");

        let bad_kind = DRIVEN.replace("monochromatic", "chirp");
        assert!(RunConfig::parse(&bad_kind).is_err());

        let generated = r#"
[field]
kind = "mode-sum"
count = 6
band = [0.4, 1.8]
amplitude = 0.2
seed = 11
[time]
periods = 2
steps = 2000
"#;
        let a = RunConfig::parse(generated).unwrap();
        let b = RunConfig::parse(generated).unwrap();
        assert_eq!(a, b);
        match &a.scenario.field.drive {
            Drive::ModeSum { modes, seed } => {
                assert_eq!(modes.len(), 6);
                assert_eq!(*seed, Some(11));
            }
            other => panic!("{other:?}"),
        }

        let explicit = r#"
[field]
kind = "mode-sum"
modes = [[1.0, 1.0, 0.0], [0.5, 2.0, 1.5707963267948966]]
damping = 0.1
[time]
t1 = 10.0
steps = 1000
"#;
        let c = RunConfig::parse(explicit).unwrap();
        assert_eq!(c.scenario.field.gamma, 0.1);
        assert!(RunConfig::parse(&explicit.replace("damping = 0.1", "seed = 3")).is_err());
    }

    #[test]
    fn time_and_grid_validated() {
        assert!(RunConfig::parse(&DRIVEN.replace("steps = 20000", "steps = 100")).is_err());
        assert!(
            RunConfig::parse(&DRIVEN.replace("periods = 10", "periods = 10\nt1 = 3.0")).is_err()
        );
        assert!(RunConfig::parse(&format!("{DRIVEN}[grid]\npoints = 1000\n")).is_err());
        assert!(RunConfig::parse(&format!("{DRIVEN}[fock]\ndimension = 4\n")).is_err());
        let err = RunConfig::parse("[oscillator]\nmass = 1.0\n").unwrap_err();
        assert!(err.to_string().contains("time"), "{err}");
    }
}
