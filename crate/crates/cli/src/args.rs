use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use planted_mst::{PlantedKind, TreeSystem};

#[derive(Debug, Parser)]
#[command(name = "planted-mst", version, about = "Planted spanning tree recovery by minimum spanning tree")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one instance and print its weight table.
    Gen,
    /// Compute the MST of an instance and its overlap with the planted structure.
    Mst {
        /// Read the instance from a CSV dump instead of generating one.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Repeat gen + mst and report per-trial overlap and weight.
    Simulate,
    /// Tabulate the extinction probabilities on a grid.
    Fp {
        #[arg(long, default_value_t = 200)]
        points: usize,
        /// Largest threshold on the grid; defaults to where the planted tail
        /// falls below 1e-12.
        #[arg(long)]
        s_max: Option<f64>,
    },
    /// Limiting overlap and mean MST weight.
    Theory,
    /// Branching-process estimate of an extinction probability or, without
    /// `--s`, of the limiting overlap.
    Bp {
        #[arg(long)]
        s: Option<f64>,
        #[arg(long, value_enum, default_value_t = SideArg::Minus)]
        side: SideArg,
        #[arg(long, default_value_t = 60)]
        depth_cap: u32,
        #[arg(long, default_value_t = 1_000_000)]
        population_cap: u64,
    },
    /// Empirical error rates of the MST-weight detection test.
    Hyptest,
    /// Compare the theory with the published reference values.
    Table1,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, value_enum, default_value_t = ModelArg::Tree)]
    pub model: ModelArg,
    #[arg(long, global = true, default_value_t = 1000)]
    pub n: usize,
    /// Mean of the planted exponential weights.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub mu: f64,
    /// Defaults: simulate 100, bp 100000, hyptest 50.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 0.1)]
    pub epsilon: f64,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Which planted-children term the tree fixed point uses.
    #[arg(long, global = true, value_enum, default_value_t = TreeSystemArg::Thinned)]
    pub tree_system: TreeSystemArg,
    /// Largest accepted `n`.
    #[arg(long, global = true, default_value_t = planted_mst::instance::DEFAULT_MAX_N)]
    pub max_n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Tree,
    Path,
    Null,
}

impl From<ModelArg> for PlantedKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Tree => PlantedKind::Tree,
            ModelArg::Path => PlantedKind::Path,
            ModelArg::Null => PlantedKind::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TreeSystemArg {
    Thinned,
    Unthinned,
}

impl From<TreeSystemArg> for TreeSystem {
    fn from(t: TreeSystemArg) -> Self {
        match t {
            TreeSystemArg::Thinned => TreeSystem::Thinned,
            TreeSystemArg::Unthinned => TreeSystem::Unthinned,
        }
    }
}
