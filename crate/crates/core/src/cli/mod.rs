//! Command-line surface: argument parsing, run configuration and commands.
//!
//! Every command resolves its flags into a [`RunConfig`] before any numerics
//! run; the resolved config is embedded verbatim in every file written.

mod commands;
mod config;
mod output;

pub use commands::{
    cmd_ctime, cmd_field, cmd_forward, cmd_lyapunov, cmd_scan, run, FieldReport, ForwardSummary, LyapunovReport,
    ScanRow,
};
pub use config::{
    parse_beta_range, parse_grid, parse_matrix_list, BaseKind, CocycleKind, GeneratorKind, Preset, RunConfig,
};
pub use output::{ppm_bytes, CSV_COMMENT};

use crate::Error;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;

/// Exit code for a successful run.
pub const EXIT_OK: i32 = 0;
/// Invalid configuration or arguments.
pub const EXIT_CONFIG: i32 = 2;
/// NaN or divergence during the computation.
pub const EXIT_NUMERIC: i32 = 3;
/// File system failure.
pub const EXIT_IO: i32 = 4;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Numeric(_) => EXIT_NUMERIC,
        Error::Io(_) | Error::Csv(_) | Error::Json(_) => EXIT_IO,
        _ => EXIT_CONFIG,
    }
}

#[derive(Debug, Parser)]
#[command(name = "nahopf", version, about = "Nonautonomous Hopf bifurcation simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the maximal Lyapunov exponent and the critical parameters.
    Lyapunov {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of cocycle steps.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Compute the upper bounding graph ψ⁺ on a grid and classify it.
    Field {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep β and classify each field.
    Scan {
        #[command(flatten)]
        common: CommonArgs,
        /// Cocycle steps used for the λ-derived markers.
        #[arg(long)]
        steps: Option<u64>,
    },
    /// Follow a forward orbit and its distance to the two-point attractor.
    Forward {
        #[command(flatten)]
        common: CommonArgs,
        /// Initial vector `x,y`.
        #[arg(long, allow_hyphen_values = true)]
        v0: Option<String>,
        #[arg(long)]
        steps: Option<u64>,
        #[arg(long)]
        burn_in: Option<u64>,
    },
    /// Audit the time-one maps of a continuous-time model.
    Ctime {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        flow: CtimeArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Named parameter set: section7, rotation or diag.
    #[arg(long)]
    pub preset: Option<String>,
    /// Base dynamics: rotation or random.
    #[arg(long)]
    pub base: Option<String>,
    /// Rotation number of the circle base.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Seed of the random symbol sequence.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Half-width of the pre-generated symbol window.
    #[arg(long)]
    pub window: Option<i64>,
    /// Cocycle: example7, rotation, diag or list:<file>.
    #[arg(long)]
    pub cocycle: Option<String>,
    /// Parameter c of the example7 cocycle.
    #[arg(long)]
    pub c: Option<f64>,
    /// Angle (radians) of the constant rotation cocycle.
    #[arg(long, allow_hyphen_values = true)]
    pub angle: Option<f64>,
    /// Expanding entry λ of the constant cocycle diag(λ, 1/λ).
    #[arg(long)]
    pub diag: Option<f64>,
    /// Prefactor κ of h(x) = κ·arctan(x).
    #[arg(long)]
    pub kappa: Option<f64>,
    /// β, or a comma-separated list of β values.
    #[arg(long, value_delimiter = ',')]
    pub beta: Vec<f64>,
    /// Evenly spaced β values `start:end:count`.
    #[arg(long)]
    pub beta_range: Option<String>,
    /// Grid resolution `NxM` (θ rows × α columns).
    #[arg(long)]
    pub grid: Option<String>,
    /// Pullback depth.
    #[arg(long)]
    pub depth: Option<u64>,
    /// Base point: angle in [0,1) or symbol index.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats: csv, json, ppm, projection, boundary.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CtimeArgs {
    /// Generator B: zero, rotation, diagonal or forced.
    #[arg(long)]
    pub generator: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub amplitude: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// RK4 step.
    #[arg(long)]
    pub step: Option<f64>,
    /// Number of (θ, α) sample points.
    #[arg(long)]
    pub samples: Option<usize>,
}
