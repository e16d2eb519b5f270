use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("node {0} has no neighbours")]
    IsolatedNode(usize),

    #[error("linear system for target node {0} is singular")]
    SingularSystem(usize),

    #[error("{0} is undefined for this input")]
    Undefined(&'static str),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("simulation state inconsistent: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config error: {0}")]
    Config(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
