use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("instance has no discrete point set")]
    MissingPoints,
    #[error("boundaries of objects overlap along a curve")]
    OverlappingBoundaries,
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
    #[error("weighted instance not supported here: {0}")]
    WeightedInstance(String),
    #[error("family has no union-complexity bound; pass an explicit tau")]
    NoUnionBound,
    #[error("algorithm {algorithm} is incompatible with this instance: {reason}")]
    IncompatibleAlgorithm { algorithm: String, reason: String },
    #[error("problem too large for exact oracle: {0}")]
    TooLarge(String),
    #[error("set is not independent: objects {0} and {1} conflict")]
    NotIndependent(usize, usize),
    #[error("crossing order is not acyclic: {0}")]
    CycleDetected(String),
    #[error("LP solver failed: {0}")]
    Solver(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("I/O error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
