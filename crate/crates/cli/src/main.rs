use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use retard_heat::quadrature::QuadratureConfig;
use retard_heat_cli::dde::{self, DdeArgs};
use retard_heat_cli::{check, compare, init_threads, solve, sweep, CliError, Overrides, RunConfig};

/// Spectral solver for the 1D heat equation with a constant delay.
#[derive(Parser, Debug)]
#[command(name = "retard-heat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the compatibility and decay checks only.
    Check(RunArgs),
    /// Solve with the spectral method.
    Solve(RunArgs),
    /// Solve with both the spectral method and the finite-difference oracle.
    Compare(RunArgs),
    /// Error and wall-time table over mode counts and oracle refinements.
    Sweep(RunArgs),
    /// Scalar delay equation utilities.
    Dde {
        #[command(subcommand)]
        command: DdeCommand,
    },
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML problem configuration.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Number of sine modes.
    #[arg(long, value_name = "N")]
    modes: Option<usize>,
    /// Spatial intervals of the output grid.
    #[arg(long)]
    nx: Option<usize>,
    /// Time intervals on [0, T] (problems without delay).
    #[arg(long)]
    nt: Option<usize>,
    /// Time steps per delay interval.
    #[arg(long)]
    nt_per_tau: Option<usize>,
    /// CSV output path.
    #[arg(long, value_name = "PATH")]
    out_field: Option<PathBuf>,
    /// JSON report path.
    #[arg(long, value_name = "PATH")]
    out_report: Option<PathBuf>,
    /// Solve even when the decay conditions fail.
    #[arg(long)]
    override_advisory: bool,
}

#[derive(Subcommand, Debug)]
enum DdeCommand {
    /// Solve x' = a x + b x(t - tau) + rho(t) with history beta on [-tau, 0].
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        #[arg(long)]
        tau: f64,
        #[arg(long, default_value = "1")]
        history: String,
        #[arg(long, default_value = "0")]
        forcing: String,
        #[arg(long)]
        t_end: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// CSV output path; stdout when omitted.
        #[arg(long, value_name = "PATH")]
        out_field: Option<PathBuf>,
    },
}

fn load(args: &RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    Overrides {
        modes: args.modes,
        nx: args.nx,
        nt: args.nt,
        nt_per_tau: args.nt_per_tau,
        out_field: args.out_field.clone(),
        out_report: args.out_report.clone(),
        override_advisory: args.override_advisory,
    }
    .apply(&mut cfg)?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads()?;
    match cli.command {
        Command::Check(args) => {
            let out = check(&load(&args)?)?;
            if out.advisory_failure {
                eprintln!("warning: advisory checks failed");
            }
            if let Some(reason) = &out.decay_skipped {
                eprintln!("warning: decay conditions not evaluated: {reason}");
            }
        }
        Command::Solve(args) => {
            let out = solve(&load(&args)?, args.override_advisory)?;
            if out.advisory_overridden {
                eprintln!("warning: solved past failed advisory checks");
            }
        }
        Command::Compare(args) => {
            let out = compare(&load(&args)?)?;
            eprintln!(
                "sup diff {:.3e}, oracle error estimate {:.3e}",
                out.diff.sup, out.oracle_error_estimate
            );
        }
        Command::Sweep(args) => {
            let out = sweep(&load(&args)?)?;
            for r in &out.rows {
                let modes = r.modes.map(|n| n.to_string()).unwrap_or_else(|| "-".into());
                eprintln!("{:8} N={modes:>4} nx={:>5} nt={:>5} sup={:.3e} {:.2}s", r.kind, r.nx, r.nt, r.sup, r.seconds);
            }
        }
        Command::Dde {
            command: DdeCommand::Solve { a, b, tau, history, forcing, t_end, points, out_field },
        } => {
            let args = DdeArgs { a, b, tau, history, forcing, t_end, points };
            let rows = dde::solve(&args, &QuadratureConfig::default())?;
            dde::write_csv(&rows, out_field.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit()
        }
    }
}
