//! `nfunc`: solve y·e^(e^y) = X and related equations from the command line.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Format;

#[derive(Parser, Debug)]
#[command(
    name = "nfunc",
    version,
    about = "Solve y·e^(e^y) = X and its generalizations"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Convergence tolerance
    #[arg(long, global = true, default_value_t = 1e-12)]
    pub tol: f64,

    /// Maximum number of corrections
    #[arg(long, global = true, default_value_t = 50)]
    pub max_iter: usize,

    /// Output format (plot-data defaults to csv)
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Iteration scheme: 1, 2, 3 or auto
    #[arg(long, global = true, default_value = "auto", value_parser = commands::parse_method)]
    pub method: nfunc::Method,

    /// Solution branch for negative exponents
    #[arg(long, global = true, value_enum)]
    pub branch: Option<BranchArg>,

    /// Starting iterate z_1 for methods 1 and 2 and the general solver
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub z1: Option<f64>,

    /// Starting iterate y_1 for the negative-branch schemes
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub y1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Lower,
    Upper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormArg {
    /// y^p·e^(e^y) = X
    Positive,
    /// y^p·e^(e^(-y)) = X
    Negative,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate N(X); negative X needs `--` or the X=… form
    Solve {
        #[arg(required = true)]
        x: Vec<String>,
    },
    /// Solve y^p·e^(e^y) = X (both branches for p < 0 unless --branch)
    General {
        /// Exponent; fractions such as 1/2 are accepted
        #[arg(short, allow_hyphen_values = true)]
        p: String,
        x: String,
        #[arg(long, value_enum, default_value = "positive")]
        form: FormArg,
    },
    /// Solve one of the reducible equation shapes, e.g. `transform z-loglog p=1000`
    Transform {
        /// Shape name, or `list`
        shape: String,
        /// Parameters as name=value
        params: Vec<String>,
    },
    /// Re-run a published worked-example table (1-7) and compare cell by cell
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=7))]
        n: u8,
    },
    /// Solve from several starting iterates and compare the results
    SweepInit {
        x: String,
        #[arg(required = true)]
        guesses: Vec<String>,
    },
    /// Quadratic scheme against Newton's method from the same starts
    CompareNewton {
        x: String,
        #[arg(required = true)]
        guesses: Vec<String>,
    },
    /// CSV data for the N curve or for a convergence trace
    PlotData {
        #[command(subcommand)]
        what: PlotKind,
    },
    /// Check the Lambert W relations of N
    Identities,
}

#[derive(Subcommand, Debug)]
pub enum PlotKind {
    /// `samples` evenly spaced points of y = N(X) on [lo, hi]
    Curve {
        #[arg(allow_hyphen_values = true)]
        lo: String,
        #[arg(allow_hyphen_values = true)]
        hi: String,
        samples: usize,
    },
    /// Iterates of one solve
    Trace {
        #[arg(allow_hyphen_values = true)]
        x: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match commands::run(&cli, &mut out) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
