//! `multicritical`: command-line front end.
//!
//! Exit codes: 0 success, 2 invalid input or usage, 3 solver failure, 4 failed cross-check.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use multicritical::Error;
use serde::Serialize;

use output::Format;

#[derive(Parser, Debug)]
#[command(name = "multicritical", version, about = "Gap probabilities at multicritical spectral edges")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Serialize)]
struct Global {
    /// Output format for tabular data.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<std::path::PathBuf>,
    /// Working precision of the orthogonal-polynomial engine (53 = f64, up to 106).
    #[arg(long, global = true, env = "MULTICRITICAL_PRECISION_BITS", default_value_t = 106)]
    precision_bits: u32,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Lenard operators L_0..L_K and their x-derivatives.
    Lenard(LenardArgs),
    /// Gap-probability curve: CDF, density and both d/ds log P routes.
    Tw(TwArgs),
    /// Solve the P34 boundary-value problem at one s.
    P34(P34Args),
    /// log P at one s.
    Gap(GapArgs),
    /// Bäcklund chain residuals on a solved profile.
    Backlund(BacklundArgs),
    /// Finite-N orthogonal-polynomial engine.
    #[command(name = "finite-n", subcommand)]
    FiniteN(FiniteNCommand),
    /// Monte-Carlo sampling of the largest eigenvalue.
    #[command(subcommand)]
    Gue(GueCommand),
    /// Independent reference values.
    #[command(subcommand)]
    Oracle(OracleCommand),
    /// Exact symbolic suite plus the finite-N Gaussian residual suite.
    VerifyAll(VerifyAllArgs),
}

#[derive(Args, Debug, Serialize)]
struct LenardArgs {
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    /// Also list the x-derivatives L'_l.
    #[arg(long)]
    print: bool,
}

#[derive(Args, Debug, Serialize)]
struct SolverArgs {
    /// Mesh spacing (default depends on k).
    #[arg(long)]
    h: Option<f64>,
    /// Left end of the domain is -left.
    #[arg(long)]
    left: Option<f64>,
    #[arg(long)]
    right: Option<f64>,
    /// Newton tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
struct TwArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// For k = 1 the grid is in the Tracy-Widom variable; otherwise in the P34 variable s.
    #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
    smin: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    smax: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    /// Largest accepted gap between the integral and finite-difference derivative routes.
    #[arg(long, default_value_t = 1e-4)]
    cross_tol: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
struct P34Args {
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    /// Include the mesh and the solution jets.
    #[arg(long)]
    dump_grid: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
struct GapArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
struct BacklundArgs {
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, allow_hyphen_values = true)]
    s: f64,
    /// Nodes where |K| is below this fraction of its maximum are skipped.
    #[arg(long, default_value_t = 1e-6)]
    k_floor: f64,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug, Serialize)]
struct PotentialArgs {
    /// `gauss`, `quartic` or `poly`, optionally followed by `:alpha=..,g1=..,...`.
    #[arg(long, default_value = "gauss")]
    potential: String,
    /// Overrides the coupling α̂ = Nα of the potential.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum FiniteNCommand {
    /// Residuals of the recurrence identities and the Lax checks at one wall.
    Verify {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 30)]
        nmax: usize,
        #[arg(long, default_value_t = 1e-2)]
        dy: f64,
        #[arg(long, default_value_t = 1e-2)]
        dalpha: f64,
    },
    /// P_N(λ_max < y); with --y2 the ratio Z_N(y)/Z_N(y2).
    Gap {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, allow_hyphen_values = true)]
        y2: Option<f64>,
    },
    /// Lax-matrix checks at one wall.
    Lax {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 40)]
        nmax: usize,
        #[arg(long, default_value_t = 1e-4)]
        dy: f64,
    },
    /// Recurrence coefficients at one wall (y = inf for the whole line).
    Recurrence {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long, allow_hyphen_values = true, default_value_t = f64::INFINITY)]
        y: f64,
        #[arg(long, default_value_t = 30)]
        nmax: usize,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum GueCommand {
    /// Empirical CDF of λ_max for weight e^{-α̂λ²}.
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        /// y grid; defaults to σ ∈ [-6, 4] in edge-scaled units.
        #[arg(long, allow_hyphen_values = true)]
        ymin: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        ymax: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
    },
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum OracleCommand {
    /// Ai and Ai' on a grid.
    Airy {
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
    },
    /// F_2 by Nyström discretization of the Airy-kernel determinant.
    #[command(alias = "f2")]
    Fredholm {
        #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
        smin: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        smax: f64,
        #[arg(long, default_value_t = 0.1)]
        step: f64,
        #[arg(long, default_value_t = 60)]
        nodes: usize,
    },
    /// Finite-N gap probability by direct integration of the eigenvalue density (N <= 3).
    Direct {
        #[command(flatten)]
        potential: PotentialArgs,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        y: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Mean and variance of the F_2 law truncated to [a, b].
    Moments {
        #[arg(long, default_value_t = -10.0, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
        b: f64,
        #[arg(long, default_value_t = 64)]
        panels: usize,
        #[arg(long, default_value_t = 60)]
        nodes: usize,
    },
}

#[derive(Args, Debug, Serialize)]
struct VerifyAllArgs {
    /// Skip the finite-N oracle comparisons and the k = 1 spot checks.
    #[arg(long)]
    quick: bool,
}

/// Failure of a run, mapped onto the exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                Error::NoConvergence(_)
                | Error::NotConverged(_)
                | Error::PrecisionExhausted { .. }
                | Error::PoleDetected { .. }
                | Error::PoleOfW { .. }
                | Error::MatchingWindowViolated(_)
                | Error::NoRealBranch(_)
                | Error::NegativeRadicand { .. } => 3,
                Error::CrossCheckFailed(_) => 4,
                _ => 2,
            },
            CliError::Usage(_) | CliError::Io(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            eprintln!("\noutput schema:\n{}", output::SCHEMA);
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(outcome) => match output::emit(&cli, &outcome) {
            Ok(()) if outcome.failed => {
                eprintln!("error: one or more checks exceeded their thresholds");
                ExitCode::from(4)
            }
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, CliError::Usage(_)) {
                eprintln!("\noutput schema:\n{}", output::SCHEMA);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
