use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use foamswell::config::{parse_config, SimConfig};
use foamswell::output::{orders_csv, write_text};
use foamswell::runner::{output_dir, run_config, RunError, Status};
use foamswell::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(name = "foamswell", version, about = "Swelling foam beam simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a simulation described by a TOML configuration.
    Run {
        config: PathBuf,
        /// Output directory; overrides FOAMSWELL_OUT and the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a verification suite and write orders.csv.
    Verify {
        /// mms-beam, mms-pore, lemmas or galerkin-cross.
        suite: Suite,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate a configuration without stepping.
    CheckConfig { config: PathBuf },
}

fn exit(status: Status) -> ExitCode {
    ExitCode::from(status.code() as u8)
}

fn load(path: &Path) -> Result<SimConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::CheckConfig { config } => match load(&config).and_then(|c| c.build().map(|_| c).map_err(|e| e.to_string())) {
            Ok(cfg) => {
                println!("ok {}", cfg.hash());
                exit(Status::Ok)
            }
            Err(e) => {
                eprintln!("error: {e}");
                exit(Status::Config)
            }
        },
        Command::Run { config, out } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return exit(Status::Config);
                }
            };
            let dir = out.unwrap_or_else(|| output_dir(&cfg));
            match run_config(&cfg, &dir) {
                Ok(outcome) => {
                    for c in outcome.checks.iter().filter(|c| !c.passed) {
                        eprintln!("check {} failed: measured {} bound {}", c.name, c.measured, c.bound);
                    }
                    if let Some(e) = &outcome.error {
                        eprintln!("solver failure at step {}: {e}", outcome.failed_step.unwrap_or(0));
                    }
                    println!(
                        "{} steps={} final_s={} mass_drift={:e} -> {}",
                        serde_json::to_string(&outcome.status).unwrap_or_default().trim_matches('"'),
                        outcome.metadata.steps,
                        outcome.summary.final_s,
                        outcome.summary.mass_drift,
                        dir.display()
                    );
                    exit(outcome.status)
                }
                Err(RunError::Config(e)) => {
                    eprintln!("error: {}: {e}", config.display());
                    exit(Status::Config)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    exit(Status::Solver)
                }
            }
        }
        Command::Verify { suite, out } => {
            let dir = out
                .or_else(|| std::env::var_os("FOAMSWELL_OUT").map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("foamswell-out"));
            let rows = match run_suite(suite) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("error: {suite} failed: {e}");
                    return exit(Status::Solver);
                }
            };
            if let Err(e) = write_text(&dir.join("orders.csv"), &orders_csv(&rows)) {
                eprintln!("error: cannot write orders.csv: {e}");
                return exit(Status::Solver);
            }
            for r in &rows {
                let observed = r.observed.map_or("-".to_string(), |o| format!("{o:.4}"));
                let verdict = if r.passed { "ok" } else { "VIOLATION" };
                println!("{} {} {} observed={} {}", r.suite, r.study, r.resolution, observed, verdict);
            }
            if rows.iter().all(|r| r.passed) {
                exit(Status::Ok)
            } else {
                exit(Status::Order)
            }
        }
    }
}
