use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("time step {dt} too coarse (limit {limit})")]
    StepTooCoarse { dt: f64, limit: f64 },

    #[error("non-finite state at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("trajectory was integrated without damping; decay certificate is meaningless")]
    NotDamped,

    #[error("position grid too narrow: need half-width {required}, have {half_width}")]
    GridTooNarrow { required: f64, half_width: f64 },

    #[error("density reached the grid boundary at t = {t} (edge/peak = {ratio:e})")]
    DensityAtBoundary { t: f64, ratio: f64 },

    #[error("momentum density reached the Nyquist band at t = {t} (edge/peak = {ratio:e}); use more grid points")]
    MomentumAliasing { t: f64, ratio: f64 },

    #[error("wavefunction not normalized: norm = {norm}")]
    NotNormalized { norm: f64 },

    #[error("state is not a displaced ground state: cross term {cross:e}")]
    NotDisplacedGaussian { cross: f64 },

    #[error("Fock truncation error: top-level population {population:e}")]
    TruncationError { population: f64 },

    #[error("time {t} is not a recorded grid sample")]
    NotOnGrid { t: f64 },

    #[error("{0}")]
    Precondition(String),

    #[error("config key `{key}`: {message}")]
    ConfigInvalid { key: String, message: String },

    #[error("scenario `{scenario}`: {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            key: key.into(),
            message: message.into(),
        }
    }

    pub(crate) fn in_scenario(self, scenario: &str) -> Self {
        Error::Scenario {
            scenario: scenario.to_owned(),
            source: Box::new(self),
        }
    }
}
