use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "pugraph", version, about = "Consensus analysis on pseudo-undirected graphs")]
pub struct Cli {
    /// Directory for output files and the run manifest. Without it, the
    /// primary result goes to stdout and the manifest to stderr.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a graph and emit its Laplacian, incidence matrix, JSON or diagnostics
    Graph {
        #[command(flatten)]
        graph: GraphArgs,
        #[arg(long, value_enum, default_value = "json")]
        emit: Emit,
    },
    /// Left null vector, consensus value and feasibility
    Consensus {
        #[command(flatten)]
        graph: GraphArgs,
        /// Initial state as a JSON array
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
    },
    /// Integrate x' = -Lx
    Simulate {
        #[command(flatten)]
        graph: GraphArgs,
        /// Initial state as a JSON array
        #[arg(long, allow_hyphen_values = true)]
        x0: String,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value_t = 100.0)]
        t_max: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Single-edge gain margins
    Robustness {
        #[command(flatten)]
        graph: GraphArgs,
        /// Perturbed edge as `tail,head`
        #[arg(long)]
        edge: Option<String>,
        /// Unit-path sweep range `nmin:nmax`
        #[arg(long, requires = "class")]
        sweep: Option<String>,
        /// `leading:l`, `central`, `central:upper` or `trailing:k`
        #[arg(long, requires = "sweep")]
        class: Option<String>,
    },
    /// Cooperative salvo simulation
    Salvo {
        #[arg(long)]
        config: PathBuf,
    },
    /// Rerun a bundled artifact and compare with its expected values
    Reproduce {
        #[arg(value_enum)]
        artifact: Artifact,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct GraphArgs {
    /// Graph JSON file
    #[arg(long, conflicts_with_all = ["path", "forward", "reverse"])]
    pub graph: Option<PathBuf>,
    /// Path graph on `n` nodes
    #[arg(long)]
    pub path: Option<usize>,
    /// Forward weights `w12,w23,..` (default 1)
    #[arg(long, requires = "path", allow_hyphen_values = true)]
    pub forward: Option<String>,
    /// Reverse weights `w21,w32,..` (default 1)
    #[arg(long, requires = "path", allow_hyphen_values = true)]
    pub reverse: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Laplacian,
    Incidence,
    Json,
    Diagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Artifact {
    P2Tfs,
    P3Tfs,
    P4Tfs,
    P5Tfs,
    Fig3Sweeps,
    SalvoPositive,
    SalvoNegative,
}

impl Artifact {
    pub fn name(self) -> &'static str {
        match self {
            Artifact::P2Tfs => "p2-tfs",
            Artifact::P3Tfs => "p3-tfs",
            Artifact::P4Tfs => "p4-tfs",
            Artifact::P5Tfs => "p5-tfs",
            Artifact::Fig3Sweeps => "fig3-sweeps",
            Artifact::SalvoPositive => "salvo-positive",
            Artifact::SalvoNegative => "salvo-negative",
        }
    }
}
