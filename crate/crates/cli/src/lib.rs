//! Scenario-driven front end for the fast-forward scaling library: TOML
//! scenarios, validation, runs with CSV/JSON artifacts, and refinement
//! studies.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fmt;

pub mod build;
pub mod converge;
pub mod output;
pub mod run;
pub mod scenario;
pub mod validate;

pub use scenario::Scenario;

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_INSTABILITY: u8 = 3;
pub const EXIT_IO: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Parse(scenario::ParseError),
    Validation(validate::Report),
    /// Bad command-line arguments.
    Usage(String),
    /// A solver error other than instability, raised after validation passed.
    Solver(ffscale_core::Error),
    Instability(ffscale_core::Error),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Validation(_) | CliError::Usage(_) | CliError::Solver(_) => {
                EXIT_VALIDATION
            }
            CliError::Instability(_) => EXIT_INSTABILITY,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(e) => write!(f, "{e}"),
            CliError::Validation(r) => write!(f, "scenario is not runnable:\n{r}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Solver(e) => write!(f, "{e}"),
            CliError::Instability(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<ffscale_core::Error> for CliError {
    fn from(e: ffscale_core::Error) -> Self {
        match e {
            ffscale_core::Error::Instability { .. } | ffscale_core::Error::Cfl { .. } => CliError::Instability(e),
            other => CliError::Solver(other),
        }
    }
}
