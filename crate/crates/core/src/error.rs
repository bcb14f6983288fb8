use thiserror::Error;

use crate::dynamics::Trajectory;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    Shape {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("empty array")]
    Empty,

    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },

    #[error("sign tie value {0} is outside [-1, 1]")]
    InvalidSelection(f64),

    #[error("point at distance {distance} from the reference point is outside the neighborhood of radius {radius}")]
    OutOfNeighborhood { distance: f64, radius: f64 },

    #[error("cannot build problem: {0}")]
    Construction(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The iteration produced a non-finite iterate. Carries every step
    /// recorded before the blowup.
    #[error("non-finite iterate after {} recorded steps", .trajectory.records.len())]
    NumericalBlowup { trajectory: Box<Trajectory> },

    #[error("trajectory belongs to problem `{found}`, expected `{expected}`")]
    ProblemMismatch { expected: String, found: String },

    #[error("malformed CSV at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },

    #[error("cannot load matrix {}: {source}", .path.display())]
    Matrix {
        path: std::path::PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown problem `{0}`")]
    UnknownProblem(String),

    #[error("unknown certifier `{0}`")]
    UnknownCertifier(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
