use thiserror::Error;

/// Errors produced by the identification toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("label {label} out of range 1..={subsystems} at sample {sample}")]
    LabelOutOfRange {
        sample: usize,
        label: usize,
        subsystems: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible relaxed membership: {0}")]
    InfeasibleMembership(String),

    #[error("subsystem {0} has a zero-norm true parameter; NMSE is undefined")]
    ZeroNormParameter(usize),

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("every one of the {0} restarts collapsed a cluster")]
    AllRestartsDegenerate(usize),

    #[error("enumeration limit exceeded: {needed} > {limit}")]
    EnumerationLimit { needed: u128, limit: u128 },

    #[error("integer overflow computing {0}")]
    Overflow(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
