use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("scenario schema: {0}")]
    Schema(String),

    /// One entry per offending key.
    #[error("scenario validation failed:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error("unknown builtin `{0}` (see `cdglue builtins`)")]
    UnknownBuiltin(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
