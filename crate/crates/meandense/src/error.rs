use std::path::PathBuf;

use serde_json::json;

use crate::config::ConfigError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] meandense_core::Error),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 2 for numeric failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(meandense_core::Error::Numeric { .. }) => 2,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) | CliError::Usage(_) => "validation",
            CliError::Core(meandense_core::Error::Numeric { .. }) => "numeric",
            CliError::Core(meandense_core::Error::Query(_)) => "query",
            CliError::Core(meandense_core::Error::Config(_)) => "validation",
            CliError::Io { .. } | CliError::Csv(_) => "io",
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> serde_json::Value {
        let messages = match self {
            CliError::Config(c) => c.violations.clone(),
            other => vec![other.to_string()],
        };
        let mut rec = json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "messages": messages,
        });
        if let CliError::Core(meandense_core::Error::Numeric { value, point }) = self {
            rec["value"] = json!(value.to_string());
            rec["point"] = json!(point.coords());
        }
        rec
    }
}
