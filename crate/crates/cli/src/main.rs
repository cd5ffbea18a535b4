use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wcouple::config::ExperimentConfig;
use wcouple::experiments::REGISTRY;
use wcouple::{output, run_with_threads, selftest, CliError};

/// Monte Carlo experiments on Wiener-space couplings.
#[derive(Parser)]
#[command(name = "wcouple", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        /// Config file (same as --config).
        config_path: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Replaces the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; defaults to WCOUPLE_THREADS, then to the number of cores.
        #[arg(long)]
        threads: Option<usize>,
        /// Omit the timestamp line from results.csv.
        #[arg(long)]
        no_timestamp: bool,
        /// Output directory; defaults to the config's `output`, then `.`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the experiments.
    List,
    /// Run the deterministic algebraic checks.
    Selftest,
}

fn env_threads() -> Result<Option<usize>, CliError> {
    match std::env::var("WCOUPLE_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Config(format!("WCOUPLE_THREADS = '{v}' is not a thread count"))),
        Err(_) => Ok(None),
    }
}

fn run(
    path: Option<PathBuf>,
    seed: Option<u64>,
    threads: Option<usize>,
    no_timestamp: bool,
    out: Option<PathBuf>,
) -> Result<bool, CliError> {
    let path = path.ok_or_else(|| CliError::Config("no config given (run <config> or --config <path>)".into()))?;
    let config = ExperimentConfig::from_path(&path, seed)?;
    let threads = match threads {
        Some(n) => Some(n),
        None => env_threads()?,
    };
    let outcome = run_with_threads(&config, threads)?;
    let dir = out.or_else(|| config.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    output::write_outputs(&dir, &config, &outcome, !no_timestamp)?;
    for c in &outcome.claims {
        println!(
            "{} {}: {} (measured {}, expected {}, tolerance {})",
            if c.pass { "pass" } else { "FAIL" },
            c.paper_claim_id,
            c.description,
            c.measured,
            c.expected_exponent_or_value,
            c.tolerance
        );
    }
    println!(
        "{}: {} records, {} claims, {} -> {}",
        config.experiment,
        outcome.records.len(),
        outcome.claims.len(),
        if outcome.pass() { "pass" } else { "FAIL" },
        dir.display()
    );
    Ok(outcome.pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config_path, config, seed, threads, no_timestamp, out } => {
            if config_path.is_some() && config.is_some() {
                Err(CliError::Config("give the config either positionally or with --config, not both".into()))
            } else {
                run(config_path.or(config), seed, threads, no_timestamp, out)
            }
        }
        Command::List => {
            for e in REGISTRY {
                println!("{:<26} {}", e.name, e.summary);
            }
            Ok(true)
        }
        Command::Selftest => {
            let mut ok = true;
            for (name, e) in selftest::run() {
                match e {
                    None => println!("ok   {name}"),
                    Some(msg) => {
                        ok = false;
                        println!("FAIL {name}: {msg}");
                    }
                }
            }
            Ok(ok)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("wcouple: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
