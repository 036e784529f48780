//! Batch experiments over the hypermine library: configuration, execution,
//! checkpointing and result files.

pub mod checkpoint;
pub mod config;
pub mod grid;
pub mod output;
pub mod tasks;

use thiserror::Error;

pub use config::{ExperimentConfig, Task};
pub use output::EvaluationRun;
pub use tasks::run;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 2;
    pub const DATA: i32 = 3;
    pub const NONCONVERGENCE: i32 = 4;
    /// Anything not attributable to config or data (e.g. unwritable output).
    pub const INTERNAL: i32 = 1;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dataset error: {0}")]
    Data(String),

    #[error("numerical non-convergence: {0}")]
    NonConvergence(String),

    #[error("{0}")]
    Library(#[from] hypermine::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        use hypermine::Error as E;
        match self {
            CliError::Config(_) => exit::CONFIG,
            CliError::Data(_) => exit::DATA,
            CliError::NonConvergence(_) => exit::NONCONVERGENCE,
            CliError::Library(e) => match e {
                E::InvalidParameter(_) | E::OutsideConvergenceRadius { .. } | E::Unsupported(_) => exit::CONFIG,
                E::NonConvergence { .. } => exit::NONCONVERGENCE,
                E::Io { .. }
                | E::EmptyFile { .. }
                | E::Parse { .. }
                | E::DuplicateNode { .. }
                | E::MissingNode(_)
                | E::UnknownNode(_)
                | E::InvalidGraph(_)
                | E::DimensionMismatch(_) => exit::DATA,
            },
            CliError::Io { .. } | CliError::Internal(_) => exit::INTERNAL,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Worker count from `HYPERMINE_THREADS`, if set and valid.
pub fn threads_from_env() -> CliResult<Option<usize>> {
    match std::env::var("HYPERMINE_THREADS") {
        Ok(v) if v.trim().is_empty() => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::config(format!("HYPERMINE_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` inside a dedicated pool of `threads` workers (rayon's default
/// when `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::config("thread count must be ≥ 1"));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Internal(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}
