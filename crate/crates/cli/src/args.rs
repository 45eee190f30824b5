use crate::config::KernelChoice;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;

/// Regularity, commutator and entropy-balance diagnostics for sampled
/// solutions of conservation laws.
#[derive(Debug, Parser)]
#[command(name = "cldiag", version)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inspect the system registry.
    #[command(subcommand)]
    Systems(SystemsCmd),
    /// Generate a snapshot file.
    #[command(subcommand)]
    Synth(SynthCmd),
    /// VMO modulus of a field across a sweep of scales.
    Structure(StructureArgs),
    /// Check the multiplier identities of a system on random states.
    CheckCompat(CompatArgs),
    /// Companion-law residual of a field across a sweep of scales.
    Dissipation(DissipationArgs),
    /// Boundary shell integral across a sweep of scales.
    BoundaryFlux(BoundaryFluxArgs),
    /// Global entropy ledger of a time series.
    Balance(BalanceArgs),
    /// Log-log fits and exponent conditions.
    #[command(subcommand)]
    Scaling(ScalingCmd),
}

#[derive(Debug, Subcommand)]
pub enum SystemsCmd {
    /// Describe every registry system in its default dimension.
    List,
    /// Describe one system.
    Describe {
        name: String,
        /// Spatial dimension (default: 1 for burgers, 3 otherwise).
        #[arg(long)]
        k: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Grid shared by the generators: unit box, `n` cells per axis, optional
/// time axis of `nt` snapshots on `[0, t_end]`.
#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long, default_value_t = 256)]
    pub n: usize,
    /// Number of snapshots; 0 means no time axis.
    #[arg(long, default_value_t = 0)]
    pub nt: usize,
    #[arg(long, default_value_t = 1.0)]
    pub t_end: f64,
}

#[derive(Debug, Subcommand)]
pub enum SynthCmd {
    /// Periodic random-phase field of Hölder exponent alpha.
    Holder {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1)]
        dims: usize,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1)]
        components: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest wavenumber kept, in cycles per unit length.
        #[arg(long)]
        cutoff: Option<f64>,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Travelling Burgers shock on a bounded interval.
    Shock {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        u_left: f64,
        #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
        u_right: f64,
        #[arg(long, default_value_t = 0.5)]
        x0: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// Stationary shear flow in a 2D channel (periodic x, walls in y).
    Shear {
        #[command(flatten)]
        grid: GridArgs,
        /// Hölder exponent of a random profile; a sine profile when absent.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        p0: f64,
        #[arg(long, short)]
        output: PathBuf,
    },
    /// In-domain state for a registry system.
    Manufactured {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        system: Option<String>,
        #[arg(long)]
        dims: Option<usize>,
        /// `constant` or `smooth-random`.
        #[arg(long, default_value = "smooth-random")]
        mode: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Make every spatial axis bounded instead of periodic.
        #[arg(long)]
        bounded: bool,
        #[arg(long, short)]
        output: PathBuf,
    },
}

/// Scale selection shared by the sweep commands.
#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Explicit comma-separated scales.
    #[arg(long, value_delimiter = ',', conflicts_with = "eps_sweep")]
    pub epsilons: Option<Vec<f64>>,
    /// Use the configured geometric sweep (the default without --epsilons).
    #[arg(long)]
    pub eps_sweep: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Report destination (stdout when absent).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StructureArgs {
    #[arg(long, short)]
    pub input: PathBuf,
    /// Keep points at least this far from every bounded face.
    #[arg(long)]
    pub region_margin: Option<f64>,
    /// Comma-separated component indices (all when absent).
    #[arg(long, value_delimiter = ',')]
    pub components: Option<Vec<usize>>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct CompatArgs {
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DissipationArgs {
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub kernel: Option<KernelChoice>,
    /// Write the dissipation density at the finest scale as a snapshot.
    #[arg(long)]
    pub density_output: Option<PathBuf>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct BoundaryFluxArgs {
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, short)]
    pub input: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub t1: Option<f64>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[arg(long)]
    pub system: Option<String>,
    #[arg(long, short)]
    pub input: PathBuf,
    /// Mollification scale (default 8 spatial cells).
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ScalingCmd {
    /// Fit `value ~ C eps^p` to an `epsilon,value` CSV.
    Fit {
        #[arg(long, short)]
        input: PathBuf,
        /// Expected exponent; a miss by more than --tolerance exits with 2.
        #[arg(long, allow_negative_numbers = true, requires = "tolerance")]
        expect: Option<f64>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Evaluate a mixed-exponent energy-conservation criterion.
    Condition {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
        /// inhom-euler, comp-euler, mhd-caflisch or mhd-kang-lee.
        #[arg(long)]
        criterion: String,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}
