//! `fnls` command-line driver.
//!
//! Exit codes: 0 when every assertion holds, 2 when an experiment ran but
//! one of its assertions failed, 1 on any operational error. Errors go to
//! standard error prefixed with `FNLS-ERR:`.

mod commands;
mod io;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "fnls", version, about = "Ground states and dynamics of fractional Hartree-type NLS")]
struct Cli {
    /// Also write the JSON summary to this file.
    #[arg(long, global = true)]
    summary: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArgs {
    /// Run configuration (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,

    /// Override a configuration key, e.g. `--set lambda=0.5`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a configuration and report which hypothesis windows it meets.
    Validate {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compute a ground state by normalized gradient flow.
    GroundState(commands::GroundStateArgs),
    /// Integrate the time-dependent equation from a snapshot.
    Evolve(commands::EvolveArgs),
    /// Perturb a ground state and track its distance to the orbit.
    Stability(commands::StabilityArgs),
    /// Post-process states and mass-energy curves.
    Analyze {
        #[command(subcommand)]
        what: commands::Analyze,
    },
    /// Run the ground-state solver over a directory of configurations.
    Sweep(commands::SweepArgs),
}

fn run(cli: Cli) -> Result<bool, Box<dyn std::error::Error>> {
    let summary = match cli.command {
        Command::Validate { config } => commands::validate(&config)?,
        Command::GroundState(a) => commands::ground_state(&a)?,
        Command::Evolve(a) => commands::evolve(&a)?,
        Command::Stability(a) => commands::stability(&a)?,
        Command::Analyze { what } => commands::analyze(&what)?,
        Command::Sweep(a) => commands::sweep(&a)?,
    };
    let json = summary.to_json();
    if let Some(path) = &cli.summary {
        io::write_text(path, &format!("{json}\n"))?;
    }
    let mut stdout = std::io::stdout().lock();
    match writeln!(stdout, "{json}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    Ok(summary.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("FNLS-ERR: {}", e.render().to_string().trim_end());
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("FNLS-ERR: {e}");
            ExitCode::from(1)
        }
    }
}
