//! Driver for single runs and ground-state tables.

pub mod config;
pub mod output;
pub mod run;
pub mod tables;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Unreadable or invalid configuration.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// The computation itself failed; `last_good_time` is the last reached time, if known.
    #[error("run failed{}: {reason}", last_good_time.map(|t| format!(" after t = {t}")).unwrap_or_default())]
    Run { reason: String, last_good_time: Option<f64> },
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run { .. } | CliError::Io(_) => 3,
        }
    }
}

impl From<tdras::Error> for CliError {
    fn from(e: tdras::Error) -> Self {
        let last_good_time = match &e {
            tdras::Error::PropagationFailure { time, .. } => Some(*time),
            _ => None,
        };
        CliError::Run {
            reason: e.to_string(),
            last_good_time,
        }
    }
}

/// Sizes the global worker pool from `TDRAS_THREADS`, if set.
pub fn init_thread_pool() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TDRAS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("TDRAS_THREADS: expected a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("TDRAS_THREADS: {e}")))
}
