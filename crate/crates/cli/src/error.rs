use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, configuration or input layout; exit code 2.
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Unparseable input; exit code 2.
    #[error("{path}, line {line}: {reason}")]
    Input { path: String, line: u64, reason: String },

    #[error(transparent)]
    Library(#[from] blockmax::Error),

    #[error("cannot serialize output: {0}")]
    Json(#[from] serde_json::Error),

    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 1 for runtime and fit failures, 2 for usage and configuration errors.
    pub fn exit_code(&self) -> u8 {
        use blockmax::Error as E;
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Library(
                E::Shape(_)
                | E::Parameter { .. }
                | E::Domain { .. }
                | E::EmptySample { .. }
                | E::NonFinite(_)
                | E::InsufficientSample { .. },
            ) => 2,
            _ => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
