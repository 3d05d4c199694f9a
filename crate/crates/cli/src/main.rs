//! `dvp`: lattice patterns, spectra, MRA checks and wavelet decompositions
//! from a flat configuration file.

mod commands;
mod config;
mod pgm;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dvp_core::intlat::Variant;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(std::io::Error),
    Core(dvp_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use dvp_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Core(E::DegenerateClass { .. } | E::NotNormalized | E::ConditionViolated { .. }) => 1,
            CliError::Core(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    /// Symmetric cube `[-1/2, 1/2)^d`.
    #[value(name = "S", alias = "s")]
    S,
    /// Unit cube `[0, 1)^d`.
    #[value(name = "I", alias = "i")]
    I,
}

#[derive(Debug, Parser)]
#[command(name = "dvp", version, about = "Periodic wavelets of de la Vallée Poussin type on integer lattices")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file with `key = value` lines.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Fundamental domain for patterns and generating sets.
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Write the pattern and generating set of `m0`.
    Pattern(Common),
    /// Fast lattice DFT of samples on the pattern of `m0`.
    Dft(Common),
    /// Scaling and wavelet spectra and two-scale symbols of every level.
    Build(Common),
    /// Check the multiresolution properties; exit 1 on failure.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Multilevel decomposition of sampled data.
    Decompose {
        #[command(flatten)]
        common: Common,
        /// Number of decomposition steps, at most the number of factors.
        #[arg(long)]
        depth: Option<usize>,
        /// Reconstruct and report the largest sample error.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Directional detection with two anisotropic chains on box spline data.
    DemoDirectional {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Use the 1024 x 1024 grid instead of the desk-scale 256 x 256.
        #[arg(long)]
        paper_scale: bool,
    },
}

fn variant(cfg: &RunConfig, arg: Option<VariantArg>) -> Result<Variant, CliError> {
    match arg {
        Some(VariantArg::S) => Ok(Variant::Symmetric),
        Some(VariantArg::I) => Ok(Variant::Unit),
        None => cfg.variant(),
    }
}

/// `Ok(false)` is a verification failure.
fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.cmd {
        Cmd::Pattern(c) => {
            let cfg = RunConfig::load(&c.config)?;
            commands::cmd_pattern(&cfg, &c.out, variant(&cfg, c.variant)?).map(|_| true)
        }
        Cmd::Dft(c) => {
            let cfg = RunConfig::load(&c.config)?;
            commands::cmd_dft(&cfg, &c.out, variant(&cfg, c.variant)?).map(|_| true)
        }
        Cmd::Build(c) => {
            let cfg = RunConfig::load(&c.config)?;
            commands::cmd_build(&cfg, &c.out).map(|_| true)
        }
        Cmd::Verify { config } => commands::cmd_verify(&RunConfig::load(&config)?),
        Cmd::Decompose { common, depth, roundtrip } => {
            let cfg = RunConfig::load(&common.config)?;
            let v = variant(&cfg, common.variant)?;
            commands::cmd_decompose(&cfg, &common.out, v, depth, roundtrip)
        }
        Cmd::DemoDirectional { config, out, paper_scale } => {
            let cfg = config.as_deref().map(RunConfig::load).transpose()?;
            commands::cmd_demo_directional(cfg.as_ref(), &out, paper_scale)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dvp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
