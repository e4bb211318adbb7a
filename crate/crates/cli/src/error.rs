use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_CHECK: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] thermoplate::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    /// Bad input is a usage error; anything the numerics reject is a
    /// numerical failure.
    pub fn exit_code(&self) -> i32 {
        use thermoplate::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Core(
                E::InvalidInput(_)
                | E::InvalidIndex(_)
                | E::InconsistentBoundary { .. }
                | E::Parse(_),
            ) => EXIT_USAGE,
            CliError::Core(_) | CliError::Io { .. } => EXIT_NUMERICAL,
        }
    }
}
