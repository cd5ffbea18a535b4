//! Experiment runner: named, seeded experiments that write `results.csv`
//! (one row per estimate) and `summary.json` (claims, rate fits, pass flag).

pub mod config;
pub mod experiments;
pub mod outcome;
pub mod output;
pub mod quadrature;
pub mod selftest;

use config::ExperimentConfig;
use outcome::Outcome;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or inconsistent configuration.
    #[error("configuration error: {0}")]
    Config(String),
    /// Failure while running or writing results.
    #[error("run failed: {0}")]
    Run(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(_) => 1,
        }
    }
}

impl From<wiener_coupling::Error> for CliError {
    fn from(e: wiener_coupling::Error) -> Self {
        use wiener_coupling::Error::*;
        match e {
            InvalidGrid(_) | InvalidParameter(_) | Misaligned(_) => CliError::Config(e.to_string()),
            _ => CliError::Run(e.to_string()),
        }
    }
}

/// Run `config` on a pool of `threads` workers (`None`: rayon's default).
pub fn run_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome, CliError> {
    match threads {
        None => experiments::run_experiment(config),
        Some(0) => Err(CliError::Config("thread count must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Run(format!("cannot start {n} worker threads: {e}")))?;
            pool.install(|| experiments::run_experiment(config))
        }
    }
}
