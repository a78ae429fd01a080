//! Spec ingestion, command dispatch and canonical reports for the `fedosov`
//! command-line tool.

pub mod commands;
pub mod demos;
pub mod expr;
pub mod serialize;
pub mod spec;

pub use commands::{run, run_demo, Command, Outcome, RunOptions};
pub use expr::{parse_expression, print_polynomial, ParseError};
pub use spec::{Problem, ProblemSpec};

use thiserror::Error;

/// Environment variable supplying the default truncation order.
pub const ORDER_ENV: &str = "FEDOSOV_ORDER";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{context}: {source}")]
    Parse { context: String, source: ParseError },
    #[error("invalid spec: {0}")]
    Spec(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error(transparent)]
    Core(#[from] fedosov_core::Error),
}

impl CliError {
    /// 1 for validation failures, 2 for malformed input, 3 when the solver
    /// finds the problem infeasible.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Parse { .. } | Self::Spec(_) => 2,
            Self::Validation(_) => 1,
            Self::Core(fedosov_core::Error::Inconsistent(_)) => 3,
            Self::Core(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Parse { .. } => "parse",
            Self::Spec(_) => "spec",
            Self::Validation(_) => "validation",
            Self::Core(fedosov_core::Error::Inconsistent(_)) => "infeasible",
            Self::Core(_) => "core",
        }
    }
}

/// Flag, then spec document, then environment, then the built-in default.
pub fn resolve_order(flag: Option<u32>, spec: Option<u32>, env: Option<&str>) -> Result<u32, CliError> {
    let order = match (flag, spec, env) {
        (Some(n), _, _) | (None, Some(n), _) => n,
        (None, None, Some(raw)) => raw
            .trim()
            .parse()
            .map_err(|_| CliError::Spec(format!("{ORDER_ENV} must be a positive integer, got `{raw}`")))?,
        (None, None, None) => fedosov_core::fedosov_solver::DEFAULT_ORDER,
    };
    if order == 0 {
        return Err(CliError::Spec("the truncation order must be at least 1".into()));
    }
    Ok(order)
}
