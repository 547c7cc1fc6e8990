use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Compute(#[from] qrlab::Error),
    #[error("{0} of {1} criteria failed")]
    ToleranceFail(usize, usize),
}

impl CliError {
    /// 1 for unmet criteria, 2 for anything that prevented a verdict.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::ToleranceFail(..) => 1,
            _ => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
