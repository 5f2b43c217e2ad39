use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition violated: {msg} (residual {residual:e})")]
    Precondition { msg: String, residual: f64 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("resource limit: {0}")]
    Resource(String),
    #[error("exact arithmetic unavailable: {0}")]
    NotExact(String),
    #[error("compatibility failure at {count} frequencies; first {first}")]
    Compatibility { count: usize, first: String },
    #[error("closedness violated at {count} (xi, j, k) triples; first {first}")]
    Closedness { count: usize, first: String },
    #[error("no valid witness sequence: {0}")]
    NoWitness(String),
    #[error("bandwidth cap exceeded: {0}")]
    Bandwidth(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
