//! `lambda1d`: regenerates the figure data of the Λ-atom waveguide model as CSV.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lambda1d_core::scattering::GroundState;

/// Exit status for an invalid configuration.
pub const EXIT_INVALID: u8 = 2;
/// Exit status for a solver or I/O failure.
pub const EXIT_RUNTIME: u8 = 1;
/// Exit status when outputs were written but an internal check failed.
pub const EXIT_TOLERANCE: u8 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{0:#}")]
    Runtime(anyhow::Error),
    #[error("tolerance check failed: {0}")]
    Tolerance(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Runtime(_) => EXIT_RUNTIME,
            CliError::Tolerance(_) => EXIT_TOLERANCE,
        }
    }
}

impl From<lambda1d_core::Error> for CliError {
    fn from(e: lambda1d_core::Error) -> Self {
        use lambda1d_core::Error as E;
        match e {
            E::InvalidParameter { .. }
            | E::Precondition(_)
            | E::NegativeTime(_)
            | E::CflViolation { .. } => CliError::Invalid(e.to_string()),
            other => CliError::Runtime(other.into()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "lambda1d",
    version,
    about = "Λ-type atom in a semi-infinite waveguide: figure data as CSV"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// key=value file; command-line flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Excited-state population ρ_ee(t) for an exponential packet.
    Population(PopulationArgs),
    /// Two-photon probabilities and cloning fidelity over Δ/Γ.
    Sweep(SweepArgs),
    /// Single-photon scattering on an atom in g_A or g_B.
    Scatter(ScatterArgs),
    /// Entanglement of the emitted photon pair.
    Epr(EprArgs),
    /// Degradation by losses and dephasing.
    Noise(NoiseArgs),
}

#[derive(Debug, Args)]
pub struct PopulationArgs {
    /// Spectral width Δ/Γ (default 2).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Carrier detuning δ/Γ (default 0).
    #[arg(long)]
    pub detuning: Option<f64>,
    /// Final time t·Γ (default 6).
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Grid spacing dr·Γ/c (default 1e-3).
    #[arg(long)]
    pub dr: Option<f64>,
    /// Row spacing in t·Γ (default 0.01); a multiple of dr.
    #[arg(long)]
    pub sample: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    #[value(alias = "closed-form")]
    ClosedForm,
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SpacingArg {
    Linear,
    Log,
}

macro_rules! from_value_enum {
    ($ty:ty) => {
        impl FromStr for $ty {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, String> {
                <$ty as ValueEnum>::from_str(s, true)
            }
        }
    };
}

from_value_enum!(ModeArg);
from_value_enum!(SpacingArg);

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Smallest Δ/Γ (default 0.01).
    #[arg(long)]
    pub delta_min: Option<f64>,
    /// Largest Δ/Γ (default 12).
    #[arg(long)]
    pub delta_max: Option<f64>,
    /// Number of rows (default 200).
    #[arg(long)]
    pub points: Option<usize>,
    /// closed_form or numeric (default closed_form).
    #[arg(long)]
    pub mode: Option<ModeArg>,
    /// linear or log (default linear).
    #[arg(long)]
    pub spacing: Option<SpacingArg>,
    /// Grid spacing of the numeric mode; by default 0.01·c/max(Γ, Δ).
    #[arg(long)]
    pub dr: Option<f64>,
    /// Carrier detuning δ/Γ (default 0).
    #[arg(long)]
    pub detuning: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScatterArgs {
    /// Ground state of the atom, g_A or g_B (default g_A).
    #[arg(long)]
    pub ground: Option<GroundState>,
    /// Spectral width Δ/Γ of the incoming photon (default 0.001).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Carrier detuning δ/Γ (default 0).
    #[arg(long)]
    pub detuning: Option<f64>,
    /// Grid spacing dr·Γ/c (default 0.02).
    #[arg(long)]
    pub dr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EprArgs {
    /// Spectral width Δ/Γ of the long photon (default 0.001).
    #[arg(long)]
    pub delta_long: Option<f64>,
    /// Grid spacing dr·Γ/c (default 0.02).
    #[arg(long)]
    pub dr: Option<f64>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// β = Γ/(Γ + γ) (default 1).
    #[arg(long)]
    pub beta: Option<f64>,
    /// Pure dephasing rate γ*/Γ (default 0).
    #[arg(long)]
    pub dephasing: Option<f64>,
    /// Noiseless fidelity to degrade (default 5/6).
    #[arg(long)]
    pub fidelity: Option<f64>,
    /// Noiseless concurrence to degrade (default 1).
    #[arg(long)]
    pub concurrence: Option<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli.common, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lambda1d: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
