use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Two consecutive layers disagree on the tensor shape passed between them.
    #[error("shape mismatch between layer {from} ({from_desc}) and layer {to} ({to_desc}): {detail}")]
    Shape {
        from: usize,
        from_desc: String,
        to: usize,
        to_desc: String,
        detail: String,
    },

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {context}")]
    Numeric { context: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("failed to read {}: {detail} (byte offset {offset})", file.display())]
    Ingestion {
        file: PathBuf,
        offset: u64,
        detail: String,
    },

    #[error("corrupt record in {} at byte offset {offset}: {detail}", file.display())]
    Corruption {
        file: PathBuf,
        offset: u64,
        detail: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn numeric(context: impl Into<String>) -> Self {
        Error::Numeric {
            context: context.into(),
        }
    }

    pub fn dimension(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }

    /// Short category name, used for CLI diagnostics and exit codes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Shape { .. } | Error::Dimension { .. } => "shape",
            Error::Numeric { .. } => "numeric",
            Error::Usage(_) => "usage",
            Error::Ingestion { .. } | Error::Corruption { .. } | Error::Io(_) => "data",
            Error::Config(_) => "config",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "config" => 3,
            "data" => 4,
            "shape" => 5,
            "numeric" => 6,
            _ => 1,
        }
    }
}
