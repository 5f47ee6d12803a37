use thiserror::Error;

use crate::store::PropositionId;
use crate::Tick;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("no finite equilibrium sample size for gamma = 1")]
    EquilibriumUndefined,

    #[error("proposition id {id} out of range for universe of size {k}")]
    IdOutOfRange { id: PropositionId, k: usize },

    #[error("tick {now} is behind the store clock {clock}")]
    ClockRegression { now: Tick, clock: Tick },

    #[error("candidate batch is empty")]
    EmptyCandidates,

    #[error("tick {t} precedes the first ground-truth segment")]
    TickBeforeSchedule { t: Tick },

    #[error("config error in field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("unknown preset `{0}` (run `list-presets` for the available names)")]
    UnknownPreset(String),

    #[error("malformed snapshot row {row}: {message}")]
    Snapshot { row: usize, message: String },

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by the run configuration rather than the
    /// filesystem.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::Io(_) | Error::Csv(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
