use thiserror::Error;

/// Errors raised by the group toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("letter {letter} out of range for alphabet of size {degree}")]
    LetterOutOfRange { letter: usize, degree: usize },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("generator index {0} is not in the generating set")]
    GeneratorOutOfRange(usize),
    #[error("{0}")]
    InvalidArgument(String),
    #[error("auxiliary group: {0}")]
    Auxiliary(String),
    #[error("weights: {0}")]
    Weights(String),
    #[error("infeasible constraints: {0}")]
    Infeasible(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("session: {0}")]
    Session(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
