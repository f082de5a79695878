use thiserror::Error;

/// Top-level failure classes; each maps to one process exit code.
#[derive(Debug, Error)]
pub enum Failure {
    #[error("config error: {0}")]
    Config(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Input(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    pub fn input(e: holomimo::Error) -> Self {
        Failure::Input(e.to_string())
    }

    pub fn numeric(e: holomimo::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}
