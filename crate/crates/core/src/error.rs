use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("invalid event set: {0}")]
    InvalidEventSet(String),

    #[error("fiber count mismatch: expected {expected}, found {found}")]
    FiberCountMismatch { expected: usize, found: usize },

    #[error("splitting coefficient {value} on fiber {fiber} is outside [0, 1]")]
    InvalidCoefficient { fiber: usize, value: String },

    /// An exact interior split was requested on a slice that carries an atom.
    #[error("atom at {location} on fiber {fiber} blocks an exact split")]
    AtomObstruction { fiber: usize, location: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("level {0} is outside [0, 1]")]
    InvalidLevel(String),

    #[error("invalid measure family: {0}")]
    InvalidFamily(String),

    #[error("cell grid mismatch: expected {expected} cells, found {found}")]
    GridMismatch { expected: usize, found: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
