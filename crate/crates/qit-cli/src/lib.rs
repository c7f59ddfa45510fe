//! The `qit` command line: argument grammar, dispatch and exit codes.

pub mod commands;
pub mod figures;
pub mod report;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use qit_core::Base;
use report::{Format, Report, Status};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] qit_core::Error),
}

impl CliError {
    /// 3 for solver failures, 2 for everything rejected up front.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(qit_core::Error::Solver { .. } | qit_core::Error::NonConvergence { .. }) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

#[derive(Debug, Parser)]
#[command(name = "qit", version, about = "Quantum information measures: divergences, entropies, smoothing, applications")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Debug, Args)]
pub struct Global {
    /// Logarithm base: 2 (bits) or e (nats).
    #[arg(long, global = true, default_value = "2")]
    pub base: Base,
    /// Convergence tolerance for iterative and SDP results, and the pass threshold of `verify`.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    pub out: Format,
    /// Largest total Hilbert-space dimension accepted; also scales the SDP size cap.
    #[arg(long, global = true, default_value_t = 64)]
    pub max_dim: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Distances and divergences between two states.
    Eval(EvalArgs),
    /// Conditional entropies of a bipartite cut.
    Entropy(EntropyArgs),
    /// Smooth min- and max-entropies.
    Smooth(SmoothArgs),
    /// Hypothesis testing errors and exponents.
    Hypotest(HypotestArgs),
    /// Tripartite entropic uncertainty relation.
    Ur(UrArgs),
    /// Toeplitz extraction from a classical-quantum source.
    Extract(ExtractArgs),
    /// Finite-n AEP brackets.
    Aep(AepArgs),
    /// Plot-ready data for the built-in figures.
    Fig(FigArgs),
    /// Seeded property suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EvalQuantity {
    TraceDistance,
    Fidelity,
    PurifiedDistance,
    Dmin,
    Dpetz,
    Dmaximal,
    Dmax,
    Umegaki,
    Variance,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_enum)]
    pub quantity: EvalQuantity,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EntropyQuantity {
    Renyi,
    Min,
    Max,
    Vn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Petz,
    Sandwiched,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ArrowArg {
    Up,
    Down,
}

#[derive(Debug, Args)]
pub struct Cut {
    /// State file (JSON with dims, labels and matrix).
    #[arg(long)]
    pub state: PathBuf,
    /// Labels of the conditioned system, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "A")]
    pub a: Vec<String>,
    /// Labels of the conditioning system, comma separated; empty for none.
    #[arg(long, value_delimiter = ',', default_value = "B")]
    pub b: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub cut: Cut,
    #[arg(long, value_enum, default_value = "renyi")]
    pub quantity: EntropyQuantity,
    #[arg(long, value_enum, default_value = "sandwiched")]
    pub family: FamilyArg,
    #[arg(long, value_enum, default_value = "up")]
    pub arrow: ArrowArg,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SmoothKind {
    Min,
    Max,
}

#[derive(Debug, Args)]
pub struct SmoothArgs {
    #[command(flatten)]
    pub cut: Cut,
    #[arg(long, value_enum, default_value = "min")]
    pub kind: SmoothKind,
    #[arg(long)]
    pub eps: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TestKind {
    Helstrom,
    NeymanPearson,
    Chernoff,
    Hoeffding,
    StrongConverse,
    Stein,
}

#[derive(Debug, Args)]
pub struct HypotestArgs {
    #[arg(long)]
    pub rho: PathBuf,
    #[arg(long)]
    pub sigma: PathBuf,
    #[arg(long, value_enum)]
    pub test: TestKind,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum BasisPreset {
    Computational,
    Fourier,
    /// Eigenbasis of Pauli Y (qubits only).
    Y,
}

#[derive(Debug, Args)]
pub struct UrArgs {
    /// Tripartite state `A⊗B⊗C`; `A` is measured.
    #[arg(long)]
    pub state: PathBuf,
    #[arg(long, value_enum, default_value = "fourier")]
    pub x_basis: BasisPreset,
    #[arg(long, value_enum, default_value = "computational")]
    pub z_basis: BasisPreset,
    #[arg(long, default_value_t = 2.0)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Classical-quantum source `Z⊗E` with `|Z|` a power of two.
    #[arg(long)]
    pub state: PathBuf,
    /// Output bits.
    #[arg(long)]
    pub m: usize,
    /// Target security for the extractable-length bracket.
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AepArgs {
    /// Bipartite state; ignored when `--pmf` is given.
    #[arg(long)]
    pub state: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "A")]
    pub a: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "B")]
    pub b: Vec<String>,
    /// i.i.d. classical source, comma separated probabilities.
    #[arg(long, value_delimiter = ',')]
    pub pmf: Option<Vec<f64>>,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, value_delimiter = ',', default_value = "50,150,1250")]
    pub n: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FigureName {
    RenyiOrgy,
    Tangent,
    AepBernoulli,
}

#[derive(Debug, Args)]
pub struct FigArgs {
    #[arg(long, value_enum)]
    pub name: FigureName,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Duality,
    Dpi,
    Ns,
    Sdp,
    Ur,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
}

/// Everything a run writes, plus its exit code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn validate(g: &Global) -> CliResult<()> {
    if !(g.tol > 0.0 && g.tol.is_finite()) {
        return usage(format!("--tol must be positive, got {}", g.tol));
    }
    if g.max_dim == 0 {
        return usage("--max-dim must be positive");
    }
    Ok(())
}

pub fn dispatch(cli: &Cli) -> CliResult<Report> {
    validate(&cli.global)?;
    let g = &cli.global;
    match &cli.command {
        Command::Eval(a) => commands::eval(g, a),
        Command::Entropy(a) => commands::entropy(g, a),
        Command::Smooth(a) => commands::smooth(g, a),
        Command::Hypotest(a) => commands::hypotest(g, a),
        Command::Ur(a) => commands::ur(g, a),
        Command::Extract(a) => commands::extract(g, a),
        Command::Aep(a) => commands::aep(g, a),
        Command::Fig(a) => figures::figure(g, a),
        Command::Verify(a) => verify::verify(g, a),
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    match dispatch(&cli) {
        Ok(rep) => {
            let (stdout, summary) = rep.render(cli.global.out);
            let code = match rep.status {
                Status::Ok => 0,
                Status::NotConverged => 3,
                Status::Failed => 1,
            };
            Outcome { code, stdout, stderr: summary.map(|s| s + "\n").unwrap_or_default() }
        }
        Err(e) => {
            let code = e.exit_code();
            let mut rep = Report::new(command_name(&cli.command), cli.global.base);
            rep.status = if code == 3 { Status::NotConverged } else { Status::Failed };
            rep.summary = Some(report::Row::new().with("error", e.to_string()));
            if code != 3 {
                return Outcome { code, stdout: String::new(), stderr: format!("error: {e}\n") };
            }
            let (stdout, summary) = rep.render(cli.global.out);
            let stderr = summary.map(|s| s + "\n").unwrap_or_default() + &format!("error: {e}\n");
            Outcome { code, stdout, stderr }
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Eval(_) => "eval",
        Command::Entropy(_) => "entropy",
        Command::Smooth(_) => "smooth",
        Command::Hypotest(_) => "hypotest",
        Command::Ur(_) => "ur",
        Command::Extract(_) => "extract",
        Command::Aep(_) => "aep",
        Command::Fig(_) => "fig",
        Command::Verify(_) => "verify",
    }
}
