use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("computation error: {0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Compute(_) => ExitCode::from(3),
        }
    }
}

impl From<quadham::error::Error> for CliError {
    fn from(e: quadham::error::Error) -> Self {
        CliError::Compute(e.to_string())
    }
}
