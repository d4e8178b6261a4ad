use thiserror::Error;

/// Problems with the scenario file or its settings; the runner exits with status 2.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Read(String, #[source] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Failures writing reports or tables.
#[derive(Debug, Error)]
pub enum OutputError {
    #[error("cannot write {0}: {1}")]
    Io(String, #[source] std::io::Error),
    #[error("cannot serialize report: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot write table: {0}")]
    Csv(#[from] csv::Error),
}
