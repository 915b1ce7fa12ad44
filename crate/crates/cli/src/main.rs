use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qcycle_cli::check::{format_rows, run_checks, Scope};
use qcycle_cli::{cmd_run, cmd_sweep, cmd_table, load_config, CliError, CliResult, SweepRequest};
use qcycle_core::NumericsPolicy;

#[derive(Parser)]
#[command(
    name = "qcycle",
    version,
    about = "Quantum heat engine cycles on exactly solvable substances"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cycle described by a JSON config and print its report.
    Run { config: PathBuf },
    /// Write the closed-form efficiency table as CSV.
    Table {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suites and print a pass/fail table.
    Check {
        #[arg(long, value_enum, default_value = "all")]
        scope: Scope,
        /// JSON numerics policy overriding the defaults.
        #[arg(long)]
        numerics: Option<PathBuf>,
    },
    /// Evaluate the cycle over a grid of one cycle parameter.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, allow_negative_numbers = true)]
        from: f64,
        #[arg(long, allow_negative_numbers = true)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load_policy(path: &PathBuf) -> CliResult<NumericsPolicy> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let policy: NumericsPolicy = serde_path_to_error::deserialize(de)
        .map_err(|e| CliError::Config(format!("numerics.{}: {}", e.path(), e.inner())))?;
    policy
        .validate()
        .map_err(|e| CliError::Config(format!("numerics: {e}")))?;
    Ok(policy)
}

fn print(text: &str) {
    let mut out = std::io::stdout().lock();
    // a closed pipe is not an error worth reporting
    let _ = out.write_all(text.as_bytes());
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config } => {
            let config = load_config(&config)?;
            let json = cmd_run(&config)?;
            if config.output.report.is_none() {
                print(&json);
            }
        }
        Command::Table { out } => {
            let csv = cmd_table(out.as_deref())?;
            if out.is_none() {
                print(&csv);
            }
        }
        Command::Check { scope, numerics } => {
            let policy = match numerics {
                Some(path) => load_policy(&path)?,
                None => NumericsPolicy::default(),
            };
            let rows = run_checks(scope, &policy);
            print(&format_rows(&rows));
            let failed = rows.iter().filter(|r| !r.passed()).count();
            if failed > 0 {
                return Err(CliError::CheckFailed {
                    failed,
                    total: rows.len(),
                });
            }
        }
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            out,
        } => {
            let config = load_config(&config)?;
            let request = SweepRequest {
                param,
                from,
                to,
                steps,
            };
            let csv = cmd_sweep(&config, &request, out.as_deref())?;
            if out.is_none() {
                print(&csv);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qcycle: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
