//! Command-line surface: subcommands, flags, and defaults.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Stability analysis for two-variable functional equations: build an
/// operator from an equation, perturb an exact solution, extract the limit
/// of the operator iteration, and verify every bound along the way.
#[derive(Debug, Parser)]
#[command(name = "feq-stab", version, about, max_term_width = 100)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Full pipeline on a built-in catalog entry: perturb, audit, extract,
    /// verify, and report.
    Demo {
        /// Catalog entry to run.
        #[arg(value_enum)]
        name: EntryName,
        #[command(flatten)]
        entry: EntryArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Full pipeline on a `.feq` spec file.
    Run {
        /// Path to the `.feq` document (operator, bound, params blocks).
        spec: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        engine: EngineArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sweep the family parameter of a catalog entry (or price a spec file)
    /// and tabulate contraction factors and stability constants as CSV.
    Bound {
        /// Catalog entry name (`thm31`, `thm32`) or a `.feq` file path.
        target: String,
        /// Sweep start (defaults: thm31 p = 3.0, thm32 r = 2.5).
        #[arg(long)]
        min: Option<f64>,
        /// Sweep end, inclusive (defaults: thm31 p = 5.0, thm32 r = 4.0).
        #[arg(long)]
        max: Option<f64>,
        /// Sweep increment (default 0.5).
        #[arg(long)]
        step: Option<f64>,
        /// Inequality weight held fixed while sweeping `r` (thm32 only).
        #[arg(long, default_value_t = 0.2)]
        rho: f64,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Audits only: check the perturbed model's defect against the envelope
    /// on a grid, without extracting a limit.
    Check {
        /// Catalog entry name (`thm31`, `thm32`) or a `.feq` file path.
        target: String,
        #[command(flatten)]
        entry: EntryArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        grid: GridArgs,
        /// Also audit the four-slot product-bound hypothesis (requires a
        /// `p` parameter; catalog entry `thm31` provides one).
        #[arg(long)]
        four_point: bool,
        /// Write a JSON audit report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a catalog entry as a canonical `.feq` document.
    ExportSpec {
        /// Catalog entry to export.
        #[arg(value_enum)]
        name: EntryName,
        #[command(flatten)]
        entry: EntryArgs,
        /// Write the document here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Built-in catalog entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EntryName {
    /// Product-bounded four-point family (parameter `p`).
    Thm31,
    /// Weighted-inequality family (parameters `r`, `rho`).
    Thm32,
}

impl EntryName {
    pub fn as_str(self) -> &'static str {
        match self {
            EntryName::Thm31 => "thm31",
            EntryName::Thm32 => "thm32",
        }
    }
}

/// Catalog-entry parameters (each entry reads only the ones it uses).
#[derive(Debug, Args)]
pub struct EntryArgs {
    /// Exponent of the product bound (thm31).
    #[arg(long, default_value_t = 4.0)]
    pub p: f64,
    /// Exponent of the additive bound (thm32).
    #[arg(long, default_value_t = 3.0)]
    pub r: f64,
    /// Inequality weight, |rho| < 1 (thm32).
    #[arg(long, default_value_t = 0.2)]
    pub rho: f64,
}

/// Perturbed-model parameters.
#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Perturbation amplitude in [0, 1], as a fraction of the largest
    /// admissible envelope.
    #[arg(long, default_value_t = 0.5)]
    pub eta: f64,
    /// Perturbation seed; identical seeds reproduce identical models.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Verification-grid parameters.
#[derive(Debug, Args)]
pub struct GridArgs {
    /// Half-width of the grid box [-b, b] in every coordinate.
    #[arg(long, default_value_t = 2.0)]
    pub grid_box: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 100)]
    pub grid_count: usize,
    /// Coordinate dimension of each argument slot.
    #[arg(long, default_value_t = 1)]
    pub dim: usize,
    /// Read the grid from this file (whitespace-separated rows, 2*dim
    /// columns per point) instead of generating it.
    #[arg(long)]
    pub grid_file: Option<PathBuf>,
    /// Write the grid actually used to this file.
    #[arg(long)]
    pub grid_out: Option<PathBuf>,
}

/// Iteration budgets and tolerances.
#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Stopping tolerance for limit extraction and series tails.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Maximum operator iterations per point.
    #[arg(long, default_value_t = 200)]
    pub max_iter: usize,
    /// Expansion-depth cap for non-diagonal argument maps.
    #[arg(long, default_value_t = 18)]
    pub depth_cap: u32,
}

/// Report destinations.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the per-iteration convergence series here as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Process exit codes; the usage code avoids the not-contractive code.
pub mod exits {
    pub const OK: u8 = 0;
    pub const FAILURE: u8 = 1;
    pub const NOT_CONTRACTIVE: u8 = 2;
    pub const AUDIT_FAILED: u8 = 3;
    pub const PARSE: u8 = 4;
    pub const USAGE: u8 = 64;
}
