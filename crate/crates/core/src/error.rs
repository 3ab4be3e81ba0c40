use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("line graph is disconnected")]
    Disconnected,
    #[error("generator {0} has non-positive inertia")]
    ZeroInertia(usize),
    #[error("reduced network is singular: {0}")]
    SingularNetwork(String),
    #[error("{what} index {index} out of range (length {len})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pair (A, B) is not controllable: controllability rank {rank} < {n}")]
    Uncontrollable { rank: usize, n: usize },
    #[error("pair (A, C) is not observable: observability rank {rank} < {n}")]
    Unobservable { rank: usize, n: usize },
    #[error("pole placement failed: {0}")]
    Placement(String),
    #[error("eigenvalue iteration did not converge")]
    Eigensolver,
    #[error("non-finite value in {0}")]
    NonFinite(String),
    #[error("simulation diverged at sample {sample}: max |state| = {magnitude:e}")]
    Diverged { sample: usize, magnitude: f64 },
    #[error("unknown scenario id {0}")]
    UnknownScenario(usize),
    #[error("fault is not representable by a constant matrix: {0}")]
    UnrepresentableFault(String),
    #[error("SMO did not converge after {iterations} iterations (KKT gap {gap:e})")]
    NotConverged { iterations: usize, gap: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("enumeration plan: {0}")]
    Plan(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Stable machine-readable category, used by the CLI for error output and
    /// exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_)
            | Error::Disconnected
            | Error::ZeroInertia(_)
            | Error::SingularNetwork(_) => "grid",
            Error::IndexOutOfRange { .. } | Error::DimensionMismatch(_) => "dimension",
            Error::Uncontrollable { .. } | Error::Unobservable { .. } | Error::Placement(_) => {
                "design"
            }
            Error::Eigensolver | Error::NonFinite(_) | Error::NotConverged { .. } => "numeric",
            Error::Diverged { .. } => "simulation",
            Error::UnknownScenario(_) | Error::Plan(_) => "scenario",
            Error::UnrepresentableFault(_) => "fault",
            Error::InvalidArgument(_) | Error::Empty(_) => "argument",
            Error::Parse(_) => "parse",
            Error::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "argument" | "parse" => 2,
            "io" => 3,
            "grid" | "scenario" | "fault" => 4,
            "design" | "dimension" => 5,
            "numeric" | "simulation" => 6,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
