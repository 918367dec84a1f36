use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use lmqc::experiments::{run_to_dir, verify, RunOptions, ScenarioConfig, DEFAULT_SEED};
use lmqc::scatter::{eta_from_s_params, read_s_params};
use lmqc::Error;

#[derive(Parser)]
#[command(name = "lmqc", version, about = "Phonon interference and qubit-network scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario config and write result.csv and metadata.txt.
    Run {
        config: PathBuf,
        /// Output directory (default: `output` from the config, else ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write plot.svg.
        #[arg(long)]
        plot: bool,
        /// Seed for shot sampling.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Check fast paths against the oracles and print margins.
    Verify {
        /// Only run checks whose name contains this.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Beamsplitter reflectivity from an S-parameter CSV.
    Eta {
        sparams: PathBuf,
        /// Frequency in GHz.
        #[arg(long, default_value_t = 3.925)]
        f0: f64,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnknownScenario(_) => 2,
        Error::Io { .. } => 4,
        _ => 3,
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config, out, plot, seed } => {
            let result = ScenarioConfig::load(&config).and_then(|c| {
                let out_dir = out
                    .or_else(|| c.path("output").ok())
                    .unwrap_or_else(|| PathBuf::from("out"));
                run_to_dir(&c, &RunOptions { out_dir, plot, seed })
            });
            match result {
                Ok(r) => {
                    println!("wrote {}", r.result_csv.display());
                    for (k, v) in &r.table.metadata {
                        if k != "config" {
                            println!("  {k}: {v}");
                        }
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
        Command::Verify { filter } => {
            let checks = verify(filter.as_deref());
            for c in &checks {
                println!("{c}");
            }
            let failed = checks.iter().filter(|c| !c.passed()).count();
            println!("{} checks, {} failed", checks.len(), failed);
            if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Command::Eta { sparams, f0 } => {
            let result = std::fs::File::open(&sparams)
                .map_err(|e| Error::Io {
                    path: sparams.clone(),
                    source: e,
                })
                .and_then(read_s_params)
                .and_then(|d| eta_from_s_params(&d.records, f0));
            match result {
                Ok(e) => {
                    println!("eta = {:.6} at {} GHz", e.eta, e.frequency_ghz);
                    println!("theta1 = {:.6} rad, theta2 = {:.6} rad, sum = {:.6} rad", e.theta1, e.theta2, e.phase_sum());
                    if e.passivity_violations > 0 {
                        println!("warning: {} records with |s| > 1", e.passivity_violations);
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(exit_code(&e))
                }
            }
        }
    }
}
