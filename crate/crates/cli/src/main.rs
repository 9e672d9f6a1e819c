use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wsdlab::output::{write_json, write_report, write_rows};
use wsdlab::{
    cmd_boundary, cmd_limit_complex, cmd_limit_kahler, cmd_polytope_report, cmd_verify, parse_grid, CliError,
    ExperimentConfig, Format,
};

#[derive(Parser)]
#[command(name = "wsdlab", version, about = "Weak symplectic duality experiments on the reduced manifold")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the WSD axioms, degenerate block and closedness on samples.
    Verify(Common),
    /// Sweep rho1 and compare the pi1-image with the anticanonical divisor.
    LimitKahler(Common),
    /// Sweep rho2 (with rho1*rho2 decreasing) and compare in H^n.
    LimitComplex(Common),
    /// Pinch, shrink and grow along the boundary of the parameter square.
    Boundary(Common),
    /// Lattice maps, kernel and SD verdict for the simplex pair.
    PolytopeReport {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    rho1: f64,
    #[arg(long, default_value_t = 0.5)]
    rho2: f64,
    /// Comma-separated values or log:lo:hi:count.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl Common {
    fn config(self) -> Result<ExperimentConfig, CliError> {
        Ok(ExperimentConfig {
            n: self.n,
            rho1: self.rho1,
            rho2: self.rho2,
            grid: self.grid.as_deref().map(parse_grid).transpose()?.unwrap_or_default(),
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            out: self.out,
            format: self.format,
        })
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Verify(c) => {
            let cfg = c.config()?;
            let report = cmd_verify(&cfg)?;
            write_report(&report, cfg.format, cfg.out.as_deref())?;
            for c in report.checks.iter().filter(|c| !c.pass) {
                eprintln!("FAIL {}: {:.3e} >= {:.1e}", c.name, c.max_residual, c.tol);
            }
            Ok(report.all_pass())
        }
        Command::LimitKahler(c) => {
            let cfg = c.config()?;
            write_rows(&cmd_limit_kahler(&cfg)?, cfg.format, cfg.out.as_deref())?;
            Ok(true)
        }
        Command::LimitComplex(c) => {
            let cfg = c.config()?;
            write_rows(&cmd_limit_complex(&cfg)?, cfg.format, cfg.out.as_deref())?;
            Ok(true)
        }
        Command::Boundary(c) => {
            let cfg = c.config()?;
            write_rows(&cmd_boundary(&cfg)?, cfg.format, cfg.out.as_deref())?;
            Ok(true)
        }
        Command::PolytopeReport { n, out } => {
            write_json(&cmd_polytope_report(n)?, out.as_deref())?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
