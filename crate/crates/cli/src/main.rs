use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ris_lab_cli::commands::{cmd_run, cmd_validate, default_workers, RunOptions};
use ris_lab_cli::selftest::{run_selftest, SelftestOptions};

#[derive(Parser)]
#[command(name = "ris-lab", version, about = "Subsurface RIS phase design: analysis and Monte Carlo experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file or preset (default, fig2 ... fig6) and write CSV results.
    Run {
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "RIS_LAB_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
        /// Overwrite existing outputs.
        #[arg(long)]
        force: bool,
    },
    /// Check a scenario's invariants and preview the analytic mean SNR.
    Validate { scenario: String },
    /// Run the built-in invariant checks.
    Selftest {
        #[arg(long)]
        fast: bool,
        #[arg(long, env = "RIS_LAB_SEED", default_value_t = 1)]
        seed: u64,
        /// Perturb the hypergeometric function to confirm the oracle check fails.
        #[arg(long, hide = true)]
        inject_2f1_fault: bool,
    },
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run {
            scenario,
            out,
            seed,
            replicates,
            workers,
            force,
        } => {
            let opts = RunOptions {
                scenario,
                out,
                seed,
                replicates,
                workers: workers.unwrap_or_else(default_workers),
                force,
            };
            match cmd_run(&opts) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate { scenario } => match cmd_validate(&scenario) {
            Ok((valid, lines)) => {
                for l in lines {
                    println!("{l}");
                }
                if valid {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::FAILURE
                }
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::FAILURE
            }
        },
        Command::Selftest {
            fast,
            seed,
            inject_2f1_fault,
        } => {
            let results = run_selftest(&SelftestOptions {
                fast,
                seed,
                inject_2f1_fault,
            });
            let mut ok = true;
            for r in &results {
                println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                ok &= r.passed;
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
