//! Command-line front end for `qheat-core`.
//!
//! Single cycle runs, parameter sweeps over up to two axes, S-T diagrams,
//! isothermal entropy-change curves and ergotropy reports, written as CSV
//! or JSON with a version header.

pub mod app;
pub mod config;
pub mod curves;
pub mod output;
pub mod scenario;
pub mod svg;
pub mod sweep;

pub use app::run;

/// Failure of a CLI invocation, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] qheat_core::Error),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    /// 1 for bad input, 2 for numerical, closure and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) if e.is_usage() => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
