//! `ellipuc` — tables, measures, recurrence data, and identity verification
//! for orthogonal polynomials on the unit circle with elliptic-lattice
//! reflection coefficients.
//!
//! Exit status: 0 on success (for `verify`: all residuals within tolerance),
//! 1 when `verify` finds a residual above tolerance, 2 on configuration or
//! runtime errors.

mod config;
mod exports;
mod verify;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{resolve, Resolved, RunConfig};
use ellipuc::error::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ellipuc",
    version,
    about = "Orthogonal polynomials on the unit circle with elliptic reflection coefficients"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the (n, a_n, c_n, h_n, delta_n) table for a family.
    Table(RunConfig),
    /// Run the family's identity suites; nonzero exit on any failed check.
    Verify(RunConfig),
    /// Export the orthogonality measure (point masses, or a density grid for
    /// the hyperbolic family).
    Measure(RunConfig),
    /// Export the interval recurrence data (v_n, u_n, b_n, kappa_n, H_n).
    Dgt(RunConfig),
    /// Export the finite polygon case: vertex angles, weights, residue checks.
    Polygon(RunConfig),
}

fn emit(res: &Resolved, content: &str) -> Result<()> {
    match &res.out {
        None => {
            std::io::stdout()
                .write_all(content.as_bytes())
                .map_err(|e| Error::config("out", e.to_string()))?;
        }
        Some(path) => {
            std::fs::write(path, content)
                .map_err(|e| Error::config("out", format!("{}: {e}", path.display())))?;
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode> {
    let (config, runner): (&RunConfig, fn(&Resolved) -> Result<(String, bool)>) = match &command {
        Command::Table(c) => (c, |r| exports::cmd_table(r).map(|s| (s, true))),
        Command::Verify(c) => (c, verify::cmd_verify),
        Command::Measure(c) => (c, |r| exports::cmd_measure(r).map(|s| (s, true))),
        Command::Dgt(c) => (c, |r| exports::cmd_dgt(r).map(|s| (s, true))),
        Command::Polygon(c) => (c, |r| exports::cmd_polygon(r).map(|s| (s, true))),
    };
    let res = resolve(config)?;
    let (content, pass) = runner(&res)?;
    emit(&res, &content)?;
    Ok(if pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
