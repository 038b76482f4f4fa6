use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qperc_core::experiments::DEFAULTS;

#[derive(Debug, Parser)]
#[command(
    name = "qperc",
    version,
    about = "Monte Carlo experiments for quantum site percolation on Z^d",
    args_override_self = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every experiment.
#[derive(Clone, Debug, Args)]
pub struct Common {
    /// Lattice dimension.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Box half-width; repeat for convergence studies.
    #[arg(long = "L", value_name = "L")]
    pub sizes: Vec<u32>,
    /// Single-site law as JSON or a path to a JSON file.
    #[arg(long, conflicts_with = "p")]
    pub dist: Option<String>,
    /// Site-open probability of the law p*delta_0 + (1-p)*delta_inf.
    #[arg(long)]
    pub p: Option<f64>,
    /// `adjacency` or a path to a JSON stencil.
    #[arg(long, default_value = "adjacency")]
    pub kernel: String,
    /// Energy grid as lo:hi:steps.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Energy (r/s, decimal or float); repeatable.
    #[arg(long = "E", value_name = "E", allow_hyphen_values = true)]
    pub energies: Vec<String>,
    /// Comma-separated window half-widths.
    #[arg(long)]
    pub windows: Option<String>,
    /// Comma-separated eps values.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value_t = DEFAULTS.realizations)]
    pub realizations: usize,
    #[arg(long, default_value_t = DEFAULTS.seed)]
    pub seed: u64,
    /// box or con.
    #[arg(long, default_value = "box")]
    pub restriction: String,
    /// Collar width (defaults to twice the hopping range).
    #[arg(long)]
    pub collar: Option<u32>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Cap on parallel realizations (0: one per core).
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the integrated density of states on an energy grid.
    Ids {
        #[command(flatten)]
        common: Common,
        /// counting or projector_diag.
        #[arg(long, default_value = "counting")]
        estimator: String,
    },
    /// Estimate IDS jumps at given energies and match them to cluster spectra.
    Jumps {
        #[command(flatten)]
        common: Common,
        /// Largest cluster in the matching catalog (0 disables matching).
        #[arg(long, default_value_t = DEFAULTS.catalog_max_size)]
        max_size: usize,
    },
    /// Density of sites in finite clusters of size at least n.
    Gn {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULTS.nmax)]
        nmax: usize,
    },
    /// Expected eigenvalue counts in intervals against the Wegner constant.
    Wegner {
        #[command(flatten)]
        common: Common,
        /// Energy range ]a, b[ containing every interval.
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
        /// Interval lo:hi; repeatable.
        #[arg(long = "interval", required = true, allow_hyphen_values = true)]
        intervals: Vec<String>,
    },
    /// Per-realization log-Hölder bound at an algebraic energy.
    Loghoelder {
        #[command(flatten)]
        common: Common,
        /// Integer polynomial coefficients, constant term first.
        #[arg(long, allow_hyphen_values = true)]
        minpoly: Option<String>,
        /// Denominator b: the energy is a root of minpoly(b x).
        #[arg(long, default_value_t = 1)]
        denom: u64,
        /// Approximate value selecting the root.
        #[arg(long, allow_hyphen_values = true)]
        approx: Option<f64>,
    },
    /// Jump estimates for laws without atoms on the reals.
    Continuity {
        #[command(flatten)]
        common: Common,
    },
    /// Box and boundary-connected IDS across box sizes.
    Convergence {
        #[command(flatten)]
        common: Common,
    },
    /// Distinct eigenvalues of all small cluster Hamiltonians.
    Catalog {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULTS.catalog_max_size)]
        max_size: usize,
        /// Comma-separated potential values (default: the law's atoms, or 0).
        #[arg(long, allow_hyphen_values = true)]
        atoms: Option<String>,
    },
    /// Extend a finitely supported eigenstate by reflection.
    Mirror {
        #[command(flatten)]
        common: Common,
        /// JSON file with sites, potential, boundary, f, energy and filler.
        #[arg(long)]
        input: PathBuf,
    },
    /// Rerun the command recorded in a run manifest.
    Replay {
        /// Path to run.json.
        #[arg(long)]
        manifest: PathBuf,
        /// Output directory for the rerun.
        #[arg(long)]
        out: PathBuf,
        /// Overrides the recorded worker cap.
        #[arg(long)]
        workers: Option<usize>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ids { .. } => "ids",
            Command::Jumps { .. } => "jumps",
            Command::Gn { .. } => "gn",
            Command::Wegner { .. } => "wegner",
            Command::Loghoelder { .. } => "loghoelder",
            Command::Continuity { .. } => "continuity",
            Command::Convergence { .. } => "convergence",
            Command::Catalog { .. } => "catalog",
            Command::Mirror { .. } => "mirror",
            Command::Replay { .. } => "replay",
        }
    }

    pub fn common(&self) -> Option<&Common> {
        match self {
            Command::Ids { common, .. }
            | Command::Jumps { common, .. }
            | Command::Gn { common, .. }
            | Command::Wegner { common, .. }
            | Command::Loghoelder { common, .. }
            | Command::Continuity { common }
            | Command::Convergence { common }
            | Command::Catalog { common, .. }
            | Command::Mirror { common, .. } => Some(common),
            Command::Replay { .. } => None,
        }
    }
}
