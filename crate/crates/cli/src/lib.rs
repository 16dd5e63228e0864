//! Command-line pipeline over `gpc-core`: analyze CI vectors, evaluate
//! occupation spectra, enumerate effective configurations, run the
//! odd-excitation harness and Hamiltonian scans.

pub mod commands;
pub mod formats;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::run;

/// Exit code for a constraint violated beyond tolerance.
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_INPUT: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] gpc_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Parser)]
#[command(name = "gpc", version, about = "Generalized Pauli constraint analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    /// Builtin table as `n,m`.
    #[arg(long, conflicts_with = "constraints")]
    pub table: Option<String>,
    /// Constraint file with `label kappa0 kappa1 ... kappam` lines.
    #[arg(long)]
    pub constraints: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ToleranceArgs {
    #[arg(long, default_value_t = 1e-9)]
    pub pin_tol: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub quasi_tol: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub violation_tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Natural occupations, constraint values and excitation weights of a CI vector.
    Analyze {
        ci_file: PathBuf,
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
        /// Largest accepted deviation of the input norm from 1.
        #[arg(long, default_value_t = 1e-6)]
        norm_tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Constraint values for occupation spectra, one per line.
    Spectrum {
        non_file: PathBuf,
        #[command(flatten)]
        table: TableArgs,
        /// Electron count, needed with --constraints.
        #[arg(long)]
        electrons: Option<usize>,
        #[command(flatten)]
        tol: ToleranceArgs,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Determinants surviving the selection rule of saturated constraints.
    Effective {
        #[command(flatten)]
        table: TableArgs,
        /// Electron count, needed with --constraints.
        #[arg(long)]
        electrons: Option<usize>,
        /// Rank, needed with --constraints.
        #[arg(long)]
        rank: Option<usize>,
        /// Saturated constraint indices, e.g. `1,2,3`; all when omitted.
        #[arg(long)]
        saturated: Option<String>,
        /// Spin label per orbital, e.g. `uududdud`.
        #[arg(long, requires = "two_sz")]
        spins: Option<String>,
        /// Twice the total S_z of the sector.
        #[arg(long, requires = "spins", allow_hyphen_values = true)]
        two_sz: Option<i32>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Randomized check of odd-excitation suppression and polytope membership.
    Verify {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 6)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Ground-state constraint values along a family of Hamiltonians.
    Scan {
        /// Lines of `param_value path`, paths relative to the manifest.
        manifest: PathBuf,
        #[command(flatten)]
        table: TableArgs,
        #[command(flatten)]
        tol: ToleranceArgs,
        /// Output file; stdout when omitted.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-express a CI vector in its natural orbitals.
    Rotate {
        ci_file: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        norm_tol: f64,
        /// Output CI file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}
