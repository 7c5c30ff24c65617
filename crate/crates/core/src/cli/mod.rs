//! Experiment runner behind the `dualprecode` binary: config parsing,
//! built-in presets and CSV output.

pub mod config;
pub mod presets;
pub mod run;

pub use config::{Axis, AxisValue, CsitMode, Layout, ScenarioConfig, SchemeId};
pub use presets::{preset, preset_text, PRESETS};
pub use run::{file_sink, run, run_collect, run_to_sink, stdout_sink, CsvRow, CSV_HEADER};

use crate::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numerical() { CliError::Numerical(e) } else { CliError::Config(e.to_string()) }
    }
}

impl CliError {
    /// 2 for configuration problems, 3 for numerical failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}
