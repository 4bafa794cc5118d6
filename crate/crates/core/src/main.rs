use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mmwave_locbf::harness::{
    load_config, metric_cdf, read_trials_csv, run_scenario, write_cdf_csv, write_results, CdfMetric, HarnessError,
    ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "mmwave-locbf",
    version,
    about = "Location-assisted mmWave beam alignment Monte Carlo"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trials.csv, summary.csv and manifest.toml.
    Run {
        /// TOML scenario file; omitted fields take their defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
        /// Comma-separated service names, e.g. gps,wifi,lte.
        #[arg(long, value_delimiter = ',')]
        services: Option<Vec<String>>,
    },
    /// Empirical CDF of a per-trial metric from a trials.csv.
    Cdf {
        /// tx_beams, total_switchings or spectral_eff_bps_hz.
        #[arg(long, default_value = "tx_beams")]
        metric: CdfMetric,
        /// Per-trial CSV, or a run output directory containing trials.csv.
        #[arg(long)]
        input: PathBuf,
        /// Output CSV path; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            out,
            seed,
            trials,
            services,
        } => {
            let mut cfg = match config {
                Some(path) => load_config(&path)?,
                None => ScenarioConfig::default(),
            };
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(trials) = trials {
                cfg.trials = trials;
            }
            if let Some(names) = services {
                cfg.select_services(&names)?;
            }
            cfg.validate()?;
            let output = run_scenario(&cfg)?;
            let files = write_results(&output, &cfg, &out)?;
            eprintln!(
                "{} records from {} trials -> {}",
                output.records.len(),
                cfg.trials,
                files.trials.parent().unwrap_or(&out).display()
            );
            Ok(())
        }
        Command::Cdf { metric, input, out } => {
            let input = if input.is_dir() {
                input.join("trials.csv")
            } else {
                input
            };
            let records = read_trials_csv(&input)?;
            let rows = metric_cdf(&records, metric)?;
            match out {
                Some(path) => {
                    let file = fs::File::create(&path).map_err(|e| HarnessError::Io {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                    write_cdf_csv(&rows, file)
                }
                None => {
                    let stdout = io::stdout();
                    let mut lock = stdout.lock();
                    write_cdf_csv(&rows, &mut lock)?;
                    lock.flush().ok();
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
