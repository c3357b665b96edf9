//! `dcmd`: simulate the coupled membrane-distillation plant, solve its
//! stationary problem, verify the discrete operator structure, and measure
//! scheme convergence orders.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod io;

use commands::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "dcmd",
    about = "Membrane-distillation plant simulation and boundary output tracking",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run the closed tracking loop and write metrics (and optional field
    /// snapshots) to the output directory.
    Simulate {
        /// Scenario TOML file, or a built-in preset name: paper, paper-ci.
        #[arg(long)]
        scenario: String,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Override the linear-solver relative residual tolerance.
        #[arg(long)]
        rtol: Option<f64>,
    },
    /// Solve the stationary inlet-temperature problem and write the fields.
    Steady {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        out: PathBuf,
        /// Feed inlet temperature as an expression over x (overrides the
        /// scenario's [steady] section).
        #[arg(long = "t-f")]
        t_f: Option<String>,
        /// Permeate inlet temperature as an expression over x.
        #[arg(long = "t-p")]
        t_p: Option<String>,
    },
    /// Run the operator checks (weighted symmetry, dissipativity,
    /// eigenvalues, change of variables) and print a PASS/FAIL report.
    Verify {
        /// Grid for the checks, e.g. 5x9. Eigenvalues densify the operator,
        /// so keep this small.
        #[arg(long, default_value = "5x9")]
        grid: String,
        /// Random trial states per probe-based check.
        #[arg(long, default_value_t = 40)]
        trials: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the manufactured-solution refinement ladders and report the
    /// observed spatial and temporal orders.
    Convergence {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            scenario,
            out,
            rtol,
        } => commands::simulate(&scenario, &out, rtol),
        Command::Steady {
            scenario,
            out,
            t_f,
            t_p,
        } => {
            if let Some(e) = &t_f {
                commands::validate_steady_expr("--t-f", e)?;
            }
            if let Some(e) = &t_p {
                commands::validate_steady_expr("--t-p", e)?;
            }
            commands::steady(&scenario, &out, t_f.as_deref(), t_p.as_deref())
        }
        Command::Verify {
            grid,
            trials,
            seed,
            out,
        } => commands::verify(&grid, trials, seed, out.as_ref()),
        Command::Convergence { out } => commands::convergence(out.as_ref()),
    }
}

/// Entry point shared by the binary and the tests. Exit codes: 0 success,
/// 1 validation failure, 2 numerical failure.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version are not failures
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}
