//! `hilmod`: batch front end for the hilmod library.

mod commands;
mod config;
mod grid;
mod output;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use grid::GridKind;
use output::Format;

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_INDETERMINATE: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Lib(hilmod::Error),
}

impl From<hilmod::Error> for CliError {
    fn from(e: hilmod::Error) -> Self {
        CliError::Lib(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) | CliError::Io(s) => f.write_str(s),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use hilmod::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_NUMERIC,
            CliError::Lib(e) => match e {
                E::Inconclusive { .. } => EXIT_INDETERMINATE,
                E::Arity { .. }
                | E::Domain { .. }
                | E::InvalidMoments(_)
                | E::InvalidArgument(_)
                | E::Unsupported(_)
                | E::Io(_)
                | E::Parse(_) => EXIT_USAGE,
                _ => EXIT_NUMERIC,
            },
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hilmod",
    version,
    about = "Invariants of kernel Hilbert modules"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reproducing kernels.
    Kernel {
        #[command(subcommand)]
        cmd: KernelCmd,
    },
    /// Curvature of line bundles and frames.
    Curvature {
        #[command(subcommand)]
        cmd: CurvatureCmd,
    },
    /// Weighted shifts.
    Shift {
        #[command(subcommand)]
        cmd: ShiftCmd,
    },
    /// Curvatures of the reducing lines of M_{z^m} and the lattice verdict.
    Reduce(ReduceArgs),
    /// Quotient dimensions.
    Localize {
        #[command(subcommand)]
        cmd: LocalizeCmd,
    },
    /// Hilbert–Samuel polynomials.
    Hs {
        #[command(subcommand)]
        cmd: HsCmd,
    },
    /// Characteristic function of a finite contraction.
    Charfn(CharfnArgs),
    /// Norm ratio of weighted Bergman kernels and the module-map obstruction.
    Ratio(RatioArgs),
}

#[derive(Debug, Subcommand)]
enum KernelCmd {
    /// K(z, w), or K(ω, ω) over a grid.
    Eval(KernelEvalArgs),
}

#[derive(Debug, Subcommand)]
enum CurvatureCmd {
    /// Curvature and h-invariant of a line bundle.
    Line(LineArgs),
    /// Curvature matrix of the power frame of M_{z^m}.
    Bundle(BundleArgs),
}

#[derive(Debug, Subcommand)]
enum ShiftCmd {
    /// Weights, cumulative weights and kernel metric of a shift.
    Analyze(AnalyzeArgs),
    /// Unitary equivalence or similarity of two shifts.
    Similar(SimilarArgs),
}

#[derive(Debug, Subcommand)]
enum LocalizeCmd {
    /// dim M / [I_ω^k M].
    Dim(ModuleArgs),
}

#[derive(Debug, Subcommand)]
enum HsCmd {
    /// Fit the Hilbert–Samuel polynomial of k ↦ dim M / [I_ω^k M].
    Fit(HsArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format; single numbers default to text, the rest to JSON.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Significant digits, 6 to 17 (default 12, or HILMOD_PRECISION).
    #[arg(long)]
    pub precision: Option<usize>,
    /// Write here (atomically) instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON file of flag values; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpaceArgs {
    /// hardy, bergman, weighted-bergman, hardy-bidisk, hardy-polydisk,
    /// drury-arveson or custom.
    #[arg(long, visible_alias = "space", default_value = "hardy")]
    pub family: String,
    /// Weight of the weighted Bergman space.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub alpha: f64,
    /// Number of variables.
    #[arg(long)]
    pub n: Option<usize>,
    /// Moment table (JSON) for the custom family.
    #[arg(long)]
    pub moments: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PointArgs {
    /// A single point, e.g. 0.3+0.1i or 0.3,0.1.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    pub omega: Option<String>,
    /// Sweep a grid instead of a single point.
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    /// Points per grid axis; at most 10⁴ points in total.
    #[arg(long, default_value_t = 21)]
    pub resolution: usize,
    /// Distance δ ∈ (0, 0.5) kept from the boundary.
    #[arg(long)]
    pub margin: Option<f64>,
}

#[derive(Debug, Args)]
pub struct KernelEvalArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// First argument; coordinates separated by ';'.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    pub z: Option<String>,
    /// Second argument; defaults to z.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "grid")]
    pub w: Option<String>,
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    #[arg(long, default_value_t = 21)]
    pub resolution: usize,
    #[arg(long)]
    pub margin: Option<f64>,
    /// Series degrees kept when there is no closed form; grows with |z| by
    /// default.
    #[arg(long)]
    pub terms: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LineMethodArg {
    Series,
    Fd,
    Closed,
}

#[derive(Debug, Args)]
pub struct LineArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[command(flatten)]
    pub point: PointArgs,
    /// Defaults to closed when the family has a closed form, else series.
    #[arg(long, value_enum)]
    pub method: Option<LineMethodArg>,
    /// Finite-difference step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Metric series length for custom families; grows with |ω| by default.
    #[arg(long)]
    pub terms: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FrameArg {
    /// Sections built from the restriction shifts.
    Power,
    /// Sections built from kernels at the m-th roots.
    Roots,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BundleMethodArg {
    Fd,
    Exact,
    CrossChecked,
}

#[derive(Debug, Args)]
pub struct BundleArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, value_enum, default_value = "power")]
    pub frame: FrameArg,
    /// Root branch for --frame roots.
    #[arg(long, default_value_t = 0)]
    pub branch: u32,
    #[command(flatten)]
    pub point: PointArgs,
    /// Defaults to exact for diagonal frames, fd otherwise.
    #[arg(long, value_enum)]
    pub method: Option<BundleMethodArg>,
    #[arg(long)]
    pub step: Option<f64>,
    /// Frame series length; grows with |ω| by default.
    #[arg(long)]
    pub terms: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Descriptor JSON, @weights.csv, or hardy, bergman,
    /// bergman-power:m:k[:α], hardy-power:m:k, da-slice:ℓ.
    #[arg(long)]
    pub shift: String,
    /// Number of weights reported.
    #[arg(long, default_value_t = 16)]
    pub depth: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimilarArgs {
    #[arg(long)]
    pub source: String,
    #[arg(long)]
    pub target: String,
    #[arg(long, default_value_t = hilmod::shift::DEFAULT_DEPTH)]
    pub depth: usize,
    /// Weight agreement required for unitary equivalence.
    #[arg(long, default_value_t = hilmod::shift::DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub at: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ModuleArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// Use the submodule of functions vanishing at the origin.
    #[arg(long)]
    pub vanish_at_origin: bool,
    #[arg(long, default_value_t = 1)]
    pub k: u32,
    /// Point ω; one coordinate is repeated for every variable.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub at: String,
    /// Truncation degree; defaults to k + 2 above the generators.
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub multiplicity: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct HsArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    #[arg(long)]
    pub vanish_at_origin: bool,
    #[arg(long, default_value_t = 6)]
    pub k_max: usize,
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub at: String,
    /// Truncation degree; defaults to k_max above the generators.
    #[arg(long)]
    pub degree: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub multiplicity: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Standard,
    Printed,
}

#[derive(Debug, Args)]
pub struct CharfnArgs {
    /// Rows separated by ';' (entries a+bi), JSON, or @file.
    #[arg(long, allow_hyphen_values = true)]
    pub matrix: String,
    #[command(flatten)]
    pub point: PointArgs,
    #[arg(long, value_enum, default_value = "standard")]
    pub variant: VariantArg,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct RatioArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: f64,
    #[command(flatten)]
    pub point: PointArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

fn override_all(cmd: clap::Command) -> clap::Command {
    cmd.args_override_self(true).mut_subcommands(override_all)
}

fn parse(args: Vec<String>) -> Result<Cli, clap::Error> {
    let matches = override_all(Cli::command()).try_get_matches_from(args)?;
    Cli::from_arg_matches(&matches)
}

fn run(args: Vec<String>) -> Result<u8, CliError> {
    let args = config::expand(args)?;
    let cli = match parse(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return Ok(code);
        }
    };
    let (report, out) = commands::dispatch(cli.command)?;
    let format = out.format.unwrap_or_else(|| report.default_format());
    let rendered = report.render(format)?;
    match &out.output {
        Some(path) => output::write_atomic(path, &rendered)?,
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(if report.indeterminate {
        EXIT_INDETERMINATE
    } else {
        0
    })
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("hilmod: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
