//! Driver for the `momap` command line tool: model files, verification
//! suites, stratification runs and the JSON report.

pub mod commands;
pub mod model_file;
pub mod report;
pub mod suites;

pub use report::{CheckResult, Report, Status};

/// Failures of a command. Verification failures are not errors; they are
/// recorded in the report and reflected in the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] momap::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_input_error() => 1,
            _ => 2,
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
