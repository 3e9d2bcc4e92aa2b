//! Batch front end for the `retard-heat` solvers.
//!
//! Every subcommand reads a TOML [`config::RunConfig`], writes its artifacts
//! and maps the outcome to an exit status:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, advisory warnings allowed |
//! | 1 | configuration or input error |
//! | 2 | hard compatibility failure |
//! | 3 | numerical failure |
//! | 4 | decay proxies failed and `--override-advisory` was not given |

pub mod commands;
pub mod config;
pub mod dde;

use std::process::ExitCode;

use thiserror::Error;

pub use commands::{check, compare, solve, sweep, Overrides, SweepRow};
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("incompatible data: {0}")]
    Compatibility(String),

    #[error("decay conditions failed (pass --override-advisory to solve anyway): {0}")]
    Advisory(String),

    #[error(transparent)]
    Solver(#[from] retard_heat::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use retard_heat::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Compatibility(_) => 2,
            CliError::Advisory(_) => 4,
            CliError::Solver(e) => match e {
                E::Compatibility { .. } => 2,
                E::Quadrature { .. } | E::InsufficientData { .. } | E::Numeric(_) => 3,
                E::Input(_)
                | E::Domain(_)
                | E::Syntax { .. }
                | E::UnknownIdentifier { .. }
                | E::Unbound(_)
                | E::Unsupported(_)
                | E::Proportionality { .. } => 1,
            },
        }
    }

    pub fn exit(&self) -> ExitCode {
        ExitCode::from(self.exit_code())
    }
}

/// Caps the global rayon pool at `RETARD_HEAT_THREADS` when set.
pub fn init_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("RETARD_HEAT_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Config(format!("RETARD_HEAT_THREADS must be a positive integer, got `{raw}`")))?;
    if n == 0 {
        return Err(CliError::Config("RETARD_HEAT_THREADS must be positive".into()));
    }
    // A pool set up earlier in the process wins; that is fine for tests.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}
