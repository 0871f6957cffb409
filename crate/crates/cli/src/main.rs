//! `slpinn`: training runs, verification suites, rate checks and field export.

mod dump;
mod train;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slpinn::train::TargetSet;
use slpinn::Method;

/// Exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;
pub const EXIT_TRAINING: u8 = 4;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Verification(String),
    Training(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => EXIT_CONFIG,
            Failure::Verification(_) => EXIT_VERIFY,
            Failure::Training(_) => EXIT_TRAINING,
            Failure::Other(_) => EXIT_OTHER,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Verification(m) | Failure::Training(m) | Failure::Other(m) => m,
        }
    }
}

impl From<slpinn::Error> for Failure {
    fn from(e: slpinn::Error) -> Self {
        use slpinn::Error as E;
        match e {
            E::Config(_) | E::InvalidInput(_) | E::Model(_) => Failure::Config(e.to_string()),
            E::Verification(_) | E::Quadrature(_) => Failure::Verification(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(name = "slpinn", version, about = "Plain and singular-layer PINNs for plane-parallel flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train networks over a viscosity sweep and write error tables, traces and models.
    Train(TrainArgs),
    /// Check exact fields, loss gradients, corrector cancellation and wall conditions.
    Verify(VerifyArgs),
    /// Fit the small-viscosity rates of the closed-form fields.
    Rates(RatesArgs),
    /// Write prediction, exact field and pointwise error of a model on a layered grid.
    DumpFields(DumpArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum MethodArg {
    Plain,
    Sl,
    Both,
}

impl MethodArg {
    pub fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Plain => vec![Method::Plain],
            MethodArg::Sl => vec![Method::SingularLayer],
            MethodArg::Both => Method::BOTH.to_vec(),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum TargetsArg {
    Velocity,
    Vorticity,
    Both,
}

impl From<TargetsArg> for TargetSet {
    fn from(t: TargetsArg) -> Self {
        match t {
            TargetsArg::Velocity => TargetSet::Velocity,
            TargetsArg::Vorticity => TargetSet::Vorticity,
            TargetsArg::Both => TargetSet::Both,
        }
    }
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// TOML file with experiment keys; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub targets: Option<TargetsArg>,
    #[arg(long, value_enum)]
    pub method: Option<MethodArg>,
    /// Comma-separated viscosities.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',')]
    pub seeds: Option<Vec<u64>>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, env = "SLPINN_OUT", default_value = "slpinn-out")]
    pub out: PathBuf,
    /// Worker threads for independent (ε, method, seed) chains.
    #[arg(long, env = "SLPINN_JOBS", default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_delimiter = ',', default_values_t = slpinn::metrics::EPS_SWEEP)]
    pub eps: Vec<f64>,
    /// Random parameter draws per loss for the gradient check.
    #[arg(long, default_value_t = 10)]
    pub gradient_draws: usize,
    /// Random parameter draws for the cancellation and wall checks.
    #[arg(long, default_value_t = 100)]
    pub draws: usize,
}

#[derive(Args, Debug)]
pub struct RatesArgs {
    #[arg(long, value_delimiter = ',', default_values_t = slpinn::metrics::EPS_SWEEP)]
    pub eps: Vec<f64>,
    #[arg(long, env = "SLPINN_OUT", default_value = "slpinn-out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    /// Model file written by `train`, or an exact pseudo-model.
    pub model: PathBuf,
    /// Points in z (split between the two boundary layers and the outer region).
    #[arg(long, default_value_t = 600)]
    pub resolution: usize,
    /// Points in x for two-dimensional fields.
    #[arg(long, default_value_t = 100)]
    pub x_points: usize,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Train(a) => train::run(a),
        Command::Verify(a) => verify::run_verify(a),
        Command::Rates(a) => verify::run_rates(a),
        Command::DumpFields(a) => dump::run(a),
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
