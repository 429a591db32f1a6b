//! Parameter sweeps over the operators with deterministic CSV output.

pub mod config;
pub mod output;
pub mod run;

pub use config::ExperimentConfig;
pub use run::{run, Command, RunOutcome};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(#[from] gs_operators::Error),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

/// Exit status when the run succeeded but found bound violations.
pub const EXIT_VIOLATION: i32 = 4;
