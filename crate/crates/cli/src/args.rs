use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "radocolor",
    version,
    about = "Colorings of the nonzero rationals and regularity proofs"
)]
pub struct Cli {
    /// Human-readable tables instead of JSON.
    #[arg(long, global = true)]
    pub pretty: bool,

    /// Output format for proofs.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Latex,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the coloring families, or describe one.
    Catalog { family: Option<String> },
    /// Color of each rational under a coloring.
    Eval {
        #[command(flatten)]
        coloring: ColoringArgs,
        /// Rationals as `n/d`.
        #[arg(required = true, allow_hyphen_values = true)]
        values: Vec<String>,
    },
    /// Search a finite set for monochromatic solutions.
    Verify {
        #[command(flatten)]
        coloring: ColoringArgs,
        #[command(flatten)]
        equation: EquationArgs,
        #[command(flatten)]
        universe: UniverseArgs,
        /// Check every sub-multiset of the coefficients.
        #[arg(long)]
        strong: bool,
        /// Report at most this many solutions per equation.
        #[arg(long, default_value_t = 20)]
        limit: usize,
    },
    /// Forbidden ratios of an equation.
    Ratios {
        #[command(flatten)]
        equation: EquationArgs,
    },
    /// Search for a coloring or a proof that none exists.
    Prove {
        #[command(flatten)]
        equation: EquationArgs,
        #[command(flatten)]
        search: SearchArgs,
        /// Drop forced rows that no contradiction depends on.
        #[arg(long)]
        trim: bool,
        /// Write the result document here instead of stdout.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// All colorings of a finite universe, up to renaming colors.
    Enumerate {
        #[command(flatten)]
        equation: EquationArgs,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Check a proof table.
    CheckTable {
        /// A proof tree, or a `prove` result document.
        file: PathBuf,
        /// Check against this equation instead of the one in the file.
        #[arg(long = "eq", alias = "coeffs")]
        equation: Option<String>,
        #[arg(long)]
        colors: Option<u32>,
    },
    /// Re-emit a valid proof as LaTeX (default) or JSON.
    Export { file: PathBuf },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ColoringArgs {
    /// Compact form such as `cpn:2:3` or `c4pi:0,2,1`.
    #[arg(long)]
    pub coloring: Option<String>,
    /// A coloring spec as JSON.
    #[arg(long)]
    pub coloring_file: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct EquationArgs {
    /// `E(q,n)` shorthand or a coefficient list.
    #[arg(long = "eq")]
    pub eq: Option<String>,
    /// Coefficients `a_1,..,a_n` of `a_1 x_1 + .. + a_n x_n = 0`.
    #[arg(long, allow_hyphen_values = true)]
    pub coeffs: Option<String>,
}

impl EquationArgs {
    pub fn text(&self) -> &str {
        self.eq
            .as_deref()
            .or(self.coeffs.as_deref())
            .unwrap_or_default()
    }
}

#[derive(Debug, Args)]
pub struct UniverseArgs {
    /// Universe config JSON.
    #[arg(long, conflicts_with = "values")]
    pub universe: Option<PathBuf>,
    /// Explicit universe: rationals separated by commas, or an integer range `a..b`.
    #[arg(long, allow_hyphen_values = true)]
    pub values: Option<String>,
    /// Leave out negative values from the default universe.
    #[arg(long)]
    pub no_negatives: bool,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long, short = 'r')]
    pub colors: u32,
    #[command(flatten)]
    pub universe: UniverseArgs,
    /// Hypotheses such as `c(1)=c(3)` or `c(2)=1`; may repeat.
    #[arg(long = "seed")]
    pub seeds: Vec<String>,
    #[arg(long, default_value_t = 10_000_000)]
    pub max_branches: u64,
    /// Largest universe to accept.
    #[arg(long, default_value_t = 200_000)]
    pub max_nodes: usize,
    /// Worker threads for the first case split.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
}
