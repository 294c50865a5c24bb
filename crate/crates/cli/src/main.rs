mod cache;
mod commands;
mod run_config;

use std::path::PathBuf;
use std::process::ExitCode;

use casimir_speckle::units::Model;
use casimir_speckle::variance::KernelVariant;
use casimir_speckle::verify::Level;
use clap::{Parser, Subcommand};

use run_config::{parse_model, Overrides, RunConfig};

pub const EXIT_VERIFICATION: u8 = 1;
pub const EXIT_NON_CONVERGENCE: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// Output was written but some points did not converge.
    NonConvergence(String),
    Verification(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn usage(e: impl std::fmt::Display) -> Self {
        Self::Usage(e.to_string())
    }

    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::NonConvergence(_) => EXIT_NON_CONVERGENCE,
            Self::Verification(_) | Self::Io(_) => EXIT_VERIFICATION,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::NonConvergence(m) => write!(f, "non-convergence: {m}"),
            Self::Verification(m) => write!(f, "verification failed: {m}"),
            Self::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e)
    }
}

fn parse_variant(s: &str) -> Result<KernelVariant, String> {
    s.parse().map_err(|e: casimir_speckle::error::Error| e.to_string())
}

/// Mean Casimir-Polder potential and its disorder-induced variance above a
/// Drude or plasma metal plate.
#[derive(Debug, Parser)]
#[command(name = "casimir-speckle", version)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo samples per point (per Matsubara term at T > 0).
    #[arg(long, global = true)]
    samples: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = parse_model)]
    model: Option<Model>,
    #[arg(long, global = true, value_parser = parse_variant)]
    kernel_variant: Option<KernelVariant>,
    /// Explicit separations z/λ_p, comma separated; replaces the config grid.
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    z: Option<Vec<f64>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mean potential over the z-grid, with its asymptote ratio.
    Mean,
    /// F(z) over the z-grid, cached and resumable.
    Fvar,
    /// Derived scales and fluctuation prefactor of a material.
    Material {
        /// Preset name or preset file; defaults to the configured material.
        preset: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Tabulate an asymptotic law, or refit its constant from an fvar CSV.
    Asymptote {
        /// mean-retarded, mean-thermal, f-intermediate, f-far or f-thermal.
        kind: String,
        #[arg(long)]
        calibrate: Option<PathBuf>,
    },
    /// Run the acceptance criteria at a sample budget.
    Verify {
        #[arg(long, default_value = "smoke")]
        level: Level,
        /// Subset of criteria, comma separated.
        #[arg(long, value_delimiter = ',')]
        criteria: Vec<u8>,
        #[arg(long)]
        json: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        seed: cli.seed,
        samples: cli.samples,
        out: cli.out.clone(),
        model: cli.model,
        kernel_variant: cli.kernel_variant,
        z: cli.z.clone(),
    };
    let rc = base.apply(&overrides);
    match cli.command {
        Command::Mean => commands::mean(&rc),
        Command::Fvar => commands::fvar(&rc),
        Command::Material { preset, json } => commands::material(&rc, preset.as_deref(), json),
        Command::Asymptote { kind, calibrate } => commands::asymptote(&rc, &kind, calibrate.as_deref()),
        Command::Verify { level, criteria, json } => commands::verify(level, &criteria, cli.seed, cli.out.as_deref(), json),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("casimir-speckle: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
