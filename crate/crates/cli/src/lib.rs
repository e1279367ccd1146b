//! `asym expand | solve | compare` on JSON problem files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod error;
pub mod output;
pub mod problem;
pub mod report;

pub use commands::{run, Cli, Summary};
pub use error::CliError;

/// Final single-line status for standard error.
pub fn status_line(result: &Result<Summary, CliError>) -> String {
    let clean = |s: String| s.replace(['\n', '\r'], " ").replace('"', "'");
    match result {
        Ok(s) => format!("status=ok code=0 command={} {}", s.command, s.detail),
        Err(CliError::Aborted { reason, t_abort }) => {
            format!("status=aborted code=4 reason={} t_abort={}", clean(reason.to_string()).replace(' ', "_"), t_abort)
        }
        Err(e) => format!("status=error code={} kind={} message=\"{}\"", e.exit_code(), e.kind(), clean(e.to_string())),
    }
}
