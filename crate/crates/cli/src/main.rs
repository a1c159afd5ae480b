mod commands;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Labeled RFS multi-target tracking with herded Gibbs sampling.
#[derive(Debug, Parser)]
#[command(name = "herdtrack", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate truth and measurements; writes measurements.txt and truth.txt.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the configured filter over a measurement file; writes
    /// estimates.txt, records.csv and timing.csv.
    Track {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
        /// Truth file; when given, records.csv carries OSPA(2) values.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Sampler override: `herded`, `birth/update` or `filter/birth/update`.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo comparison of sampler modes; writes runs.csv,
    /// summary.csv, ospa2.svg and timing.csv.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Base seed; run `i` uses `seed + i`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        /// Worker threads (default: available cores).
        #[arg(long)]
        workers: Option<usize>,
        /// Replace the configured modes with this single mode.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Per-step OSPA(2) between a truth file and an estimates file.
    Metrics {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        estimates: PathBuf,
        /// Scenario config supplying the metric section.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output CSV; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RFS_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { config, seed, out } => commands::simulate(&config, seed, &out),
        Command::Track {
            config,
            measurements,
            truth,
            seed,
            mode,
            out,
        } => commands::track(&config, &measurements, truth.as_deref(), seed, mode.as_deref(), &out),
        Command::Campaign {
            config,
            out,
            seed,
            runs,
            workers,
            mode,
        } => commands::campaign(&config, &out, seed, runs, workers, mode.as_deref()),
        Command::Metrics {
            truth,
            estimates,
            config,
            out,
        } => commands::metrics(&truth, &estimates, config.as_deref(), out.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}
