//! Command-line front end: single runs, convergence and entropy studies, and
//! the seeded property-verification suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use miondg::config::{load_config, run_convergence, run_entropy_study, run_single};
use miondg::verify::run_verify;
use miondg::SolverError;

#[derive(Parser)]
#[command(name = "miondg", version, about = "Entropy-stable LGL-DGSEM solver for ideal multi-ion GLM-MHD")]
struct Cli {
    /// Force deterministic serial evaluation (single rayon thread).
    #[arg(long, global = true)]
    serial: bool,
    /// Override the output directory from the config file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a single simulation described by a config file.
    Run { config: PathBuf },
    /// Convergence study over a list of mesh resolutions.
    Converge {
        config: PathBuf,
        /// Elements per direction, e.g. 8,16,32.
        #[arg(long, value_delimiter = ',', required = true)]
        elements: Vec<usize>,
    },
    /// Entropy study over a list of CFL numbers.
    Entropy {
        config: PathBuf,
        /// CFL values, e.g. 0.5,0.25,0.125.
        #[arg(long, value_delimiter = ',', required = true)]
        cfl: Vec<f64>,
    },
    /// Run the seeded property suites and report pass/fail per property.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.serial {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, SolverError> {
    match cli.command {
        Command::Run { config } => {
            let mut cfg = load_config(&config)?;
            if let Some(out) = cli.out {
                cfg.out_dir = out;
            }
            let summary = run_single(&cfg)?;
            if let Some((time, step)) = summary.aborted_at {
                eprintln!("simulation aborted at t = {time} (step {step})");
                return Ok(ExitCode::from(2));
            }
            println!(
                "completed; max |dS/dt| over the run: {:.3e}",
                summary.final_entropy_rate_max
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Converge { config, elements } => {
            let mut cfg = load_config(&config)?;
            if let Some(out) = cli.out {
                cfg.out_dir = out;
            }
            let result = run_convergence(&cfg, &elements)?;
            println!("elements: {:?}", result.elements);
            println!(
                "mean EOC per variable: {}",
                result
                    .mean_eocs
                    .iter()
                    .map(|v| format!("{v:.2}"))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Entropy { config, cfl } => {
            let mut cfg = load_config(&config)?;
            if let Some(out) = cli.out {
                cfg.out_dir = out;
            }
            let result = run_entropy_study(&cfg, &cfl)?;
            for row in &result.rows {
                println!(
                    "CFL {:<8} dS = {:+.6e}  max dS/dt = {:+.3e}",
                    row.cfl,
                    row.entropy_final - row.entropy_initial,
                    row.max_rate
                );
            }
            println!("fitted |dS| ~ CFL^p slope: p = {:.3}", result.slope);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { seed, samples } => {
            let report = run_verify(seed, samples);
            if report.vacuous {
                println!("warning: 0 samples requested; property checks are vacuous");
            }
            for r in &report.results {
                println!(
                    "{} {:<28} worst = {:>12.3e}  (tolerance {:.0e})",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.worst,
                    r.tolerance
                );
            }
            Ok(if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}
