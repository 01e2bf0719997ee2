//! `infree`: moment tables, diagram enumeration, cumulant and transform
//! computations, density grids, simulations and verification runs.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use infree_core::scalar::{parse_rational, Rational};
use infree_core::ErrorKind;

use output::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] infree_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Cap(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e.kind() {
                ErrorKind::Validation => 2,
                ErrorKind::ResourceCap => 3,
                ErrorKind::Numeric => 4,
            },
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Cap(_) => 3,
        }
    }
}

/// Lifts any engine error into [`CliError`].
pub fn core<E: Into<infree_core::Error>>(e: E) -> CliError {
    CliError::Core(e.into())
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).ok_or_else(|| format!("{s:?} is not a rational number"))
}

#[derive(Parser, Debug)]
#[command(name = "infree", version, about = "Exact and numerical tools for infinitesimal free probability")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Shorthand for `--format json`.
    #[arg(long, global = true, conflicts_with_all = ["csv", "pretty"])]
    json: bool,
    /// Shorthand for `--format csv`.
    #[arg(long, global = true, conflicts_with = "pretty")]
    csv: bool,
    /// Shorthand for `--format pretty`.
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

impl Cli {
    fn format(&self) -> Format {
        if self.json {
            Format::Json
        } else if self.csv {
            Format::Csv
        } else if self.pretty {
            Format::Pretty
        } else {
            self.format
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// E tr(Xⁿ) for the GOE as a polynomial in 1/N.
    GoeMoments {
        #[arg(long, required_unless_present = "word")]
        n: Option<usize>,
        /// Coloured word of independent GOEs, e.g. `1,2,1,2`.
        #[arg(long, conflicts_with = "n")]
        word: Option<String>,
    },
    /// Complex Wishart moments as polynomials in M and 1/N.
    WishartMoments {
        #[arg(long, required_unless_present = "word")]
        n: Option<usize>,
        /// Coloured word such as `1,1,2`.
        #[arg(long, conflicts_with = "n")]
        word: Option<String>,
        /// With `--cprime`, also report the limits for M = cN + c′.
        #[arg(long, value_parser = rational, allow_hyphen_values = true, requires = "cprime")]
        c: Option<Rational>,
        #[arg(long, value_parser = rational, allow_hyphen_values = true, requires = "c")]
        cprime: Option<Rational>,
    },
    /// Lists or counts a diagram class.
    Enumerate {
        #[arg(value_enum)]
        kind: DiagramKind,
        #[arg(long)]
        n: usize,
        /// Print only the number of elements.
        #[arg(long)]
        count: bool,
    },
    /// Free cumulants (and infinitesimal cumulants) from a moment file.
    Cumulants {
        #[arg(long)]
        moments_file: PathBuf,
        /// Also report κ′ from the φ′ values.
        #[arg(long)]
        infinitesimal: bool,
        /// Treat the file as cumulants and return moments.
        #[arg(long)]
        inverse: bool,
    },
    /// Infinitesimal transform identities between g and r.
    Transform {
        #[arg(value_enum)]
        direction: TransformDirection,
        #[arg(long, default_value_t = 12)]
        order: usize,
        #[command(flatten)]
        source: EnsembleArgs,
        /// JSON input: `{"moments": [...], "r": [...]}` or `{"moments": [...], "inf_moments": [...]}`.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Densities of μ and μ′ on a grid of the support.
    Density {
        #[command(flatten)]
        source: EnsembleArgs,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(long, value_enum, default_value = "closed")]
        method: DensityMethod,
        /// Extrapolation tolerance for `--method inversion`.
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Monte-Carlo estimates of normalized trace moments.
    Simulate {
        #[arg(value_enum)]
        ensemble: Ensemble,
        /// Moment order k in E tr(Xᵏ).
        #[arg(long)]
        n: usize,
        /// Matrix size.
        #[arg(long = "N", required_unless_present = "ladder")]
        size: Option<usize>,
        /// Wishart row count.
        #[arg(long = "M")]
        rows: Option<usize>,
        /// Sizes for the infinitesimal estimator, e.g. `100,200`.
        #[arg(long, value_delimiter = ',', conflicts_with = "size")]
        ladder: Option<Vec<u64>>,
        /// Wishart with a ladder: M = c·N + c′ (integers).
        #[arg(long)]
        c: Option<u64>,
        #[arg(long)]
        cprime: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Exact checks of the structural results.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCommand {
    /// N⁻¹ coefficient of E tr(XA₁⋯XAₙ) against the rule, for a constant family.
    UniversalRule {
        #[arg(long, value_enum, default_value = "rank1")]
        family: Family,
        /// Rank-one family: A = diag(λ, 1, …, 1).
        #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "2")]
        lambda: Rational,
        /// Tiled family: pattern rows separated by `;`, e.g. `1,2;0,-1`.
        #[arg(long)]
        pattern: Option<String>,
        #[arg(long)]
        n: usize,
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<u64>>,
    },
    /// Cumulants of (x+y)/√2 for two independent GOEs against the free prediction.
    NonFreeness {
        #[arg(long, default_value_t = 4)]
        n: usize,
    },
    /// Mixed (κ, κ′) of independent Wishart colours.
    WishartFreeness {
        #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "2")]
        c: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "3")]
        cprime: Rational,
        #[arg(long, default_value_t = 6)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        colors: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DiagramKind {
    Pairings,
    Nc,
    Ncc2,
    Nc2delta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TransformDirection {
    GFromR,
    RFromG,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Ensemble {
    Goe,
    Wishart,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DensityMethod {
    Closed,
    Inversion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Family {
    Rank1,
    Tiled,
}

#[derive(Args, Debug, Clone)]
struct EnsembleArgs {
    #[arg(long, value_enum, default_value = "goe")]
    ensemble: Ensemble,
    #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "1")]
    c: Rational,
    #[arg(long, value_parser = rational, allow_hyphen_values = true, default_value = "1")]
    cprime: Rational,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format();
    let result = commands::run(cli.command).and_then(|report| Ok((report.render(format)?, report.ok)));
    match result {
        Ok((text, ok)) => {
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("verification failed");
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
