use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the simulator.
#[derive(Debug, Error)]
pub enum SimError {
    /// Scenario text could not be parsed.
    #[error("line {line}: key `{key}`: {msg}")]
    Parse {
        line: usize,
        key: String,
        msg: String,
    },

    /// A parsed value violates a scenario invariant.
    #[error("invalid scenario: {0}")]
    Validation(String),

    /// A sweep axis was given with no values.
    #[error("sweep axis `{0}` is empty")]
    EmptyAxis(&'static str),

    /// Operation called outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Matrix or table shapes disagree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A scheduler or KPI was asked to work on an empty population.
    #[error("no users: {0}")]
    NoUsers(&'static str),

    /// Jain's index of an all-zero vector is 0/0.
    #[error("fairness index undefined: every throughput is zero")]
    AllZeroThroughput,

    /// Failure inside a running simulation, with the loop position.
    #[error("tti {tti}, cell {cell:?}, ue {ue:?}: {source}")]
    Run {
        tti: usize,
        cell: Option<usize>,
        ue: Option<usize>,
        #[source]
        source: Box<SimError>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SimError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SimError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn at(self, tti: usize, cell: Option<usize>, ue: Option<usize>) -> Self {
        SimError::Run {
            tti,
            cell,
            ue,
            source: Box::new(self),
        }
    }
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
