//! `omg` — experiment harness for online matrix games.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric failure
//! (failed cells or replay divergence).

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use omg_cli::config::ExperimentConfig;
use omg_cli::runner::{execute, replay, slope_from_csv, write_artifacts, ReplayVerdict};

#[derive(Parser)]
#[command(name = "omg", version, about = "Online matrix games experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute every (algorithm, adversary, T, seed) cell of a config.
    Run {
        /// Path to the TOML experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (results.csv, manifest.json).
        #[arg(long, default_value = "omg-out")]
        out: PathBuf,
        /// Worker threads for cell execution (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        /// Replace the config's seed list with a single seed.
        #[arg(long)]
        seed_override: Option<u64>,
        /// Also write a JSON-lines mirror of the CSV.
        #[arg(long)]
        jsonl: bool,
    },
    /// Re-run a config and compare bit-exactly against a recorded output.
    Replay {
        #[arg(long)]
        config: PathBuf,
        /// Directory produced by `omg run`.
        #[arg(long)]
        recorded: PathBuf,
    },
    /// Fit log-log regret growth from a results CSV.
    Slope {
        /// Path to a results.csv produced by `omg run`.
        #[arg(long = "in")]
        input: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out, jobs, seed_override, jsonl } => {
            let text = match fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return config_error(format!("cannot read {}: {e}", config.display())),
            };
            let parsed = match ExperimentConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            let artifacts = match execute(&parsed, &text, jobs, seed_override) {
                Ok(a) => a,
                Err(e) => return config_error(e),
            };
            if let Err(e) = write_artifacts(&out, &artifacts, jsonl) {
                return config_error(e);
            }
            let cells = artifacts.manifest["cells"].as_u64().unwrap_or(0);
            if artifacts.failed_cells.is_empty() {
                println!("run: {} cells ok, output in {}", cells, out.display());
                ExitCode::SUCCESS
            } else {
                for f in &artifacts.failed_cells {
                    eprintln!("cell failed: {f}");
                }
                eprintln!(
                    "run: {} of {} cells failed, output in {}",
                    artifacts.failed_cells.len(),
                    cells,
                    out.display()
                );
                ExitCode::from(EXIT_NUMERIC)
            }
        }
        Command::Replay { config, recorded } => {
            let text = match fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return config_error(format!("cannot read {}: {e}", config.display())),
            };
            let parsed = match ExperimentConfig::parse(&text) {
                Ok(c) => c,
                Err(e) => return config_error(e),
            };
            match replay(&parsed, &text, &recorded) {
                Ok(ReplayVerdict::Pass { cells }) => {
                    println!("replay: pass ({cells} cells, wall_ns excluded)");
                    ExitCode::SUCCESS
                }
                Ok(ReplayVerdict::Fail { message }) => {
                    eprintln!("replay: FAIL — {message}");
                    ExitCode::from(EXIT_NUMERIC)
                }
                Err(e) => config_error(e),
            }
        }
        Command::Slope { input } => {
            let text = match fs::read_to_string(&input) {
                Ok(t) => t,
                Err(e) => return config_error(format!("cannot read {}: {e}", input.display())),
            };
            match slope_from_csv(&text) {
                Ok(groups) => {
                    for g in groups {
                        println!(
                            "algorithm={} adversary={} d={}x{} points={} slope={:.6} intercept={:.6} r2={:.6}",
                            g.algorithm,
                            g.adversary,
                            g.d1,
                            g.d2,
                            g.points,
                            g.fit.slope,
                            g.fit.intercept,
                            g.fit.r2
                        );
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => config_error(e),
            }
        }
    }
}

fn config_error(message: String) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(EXIT_CONFIG)
}
