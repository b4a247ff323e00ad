use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("process count must be at least 1")]
    EmptySystem,

    #[error("process count {0} exceeds the supported maximum of {max}", max = crate::model::MAX_PROCESSES)]
    TooManyProcesses(usize),

    #[error("unknown protocol '{0}'")]
    UnknownProtocol(String),

    #[error("'{0}' is not a mutant protocol")]
    NotAMutant(String),

    #[error("unknown property '{0}'")]
    UnknownProperty(String),

    #[error("property '{property}' is not defined for protocol '{protocol}'")]
    UnsupportedProperty { property: String, protocol: String },

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("edge '{edge}' is not enabled for role {role}")]
    EdgeNotEnabled { role: String, edge: String },

    #[error("malformed configuration encoding: {0}")]
    Decode(String),

    #[error("malformed trace at line {line}: {message}")]
    TraceParse { line: usize, message: String },

    #[error("trace replay diverged at step {step}: {message}")]
    Replay { step: usize, message: String },
}
