use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lsrank::io::InputFormat;
use lsrank::{DEFAULT_MAX_ITER, DEFAULT_TIE_TOL, DEFAULT_TOL};

#[derive(Debug, Parser)]
#[command(
    name = "lsrank",
    version,
    about = "Least squares ranking of paired comparison data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate objects by score, least squares or generalized row sum.
    Solve {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = SolveMethod::Ls)]
        method: SolveMethod,
        #[command(flatten)]
        grs: GrsArgs,
    },
    /// Least squares rating by iterating over the loop-balanced graph.
    Iterate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
        /// Write every iterate as CSV to FILE.
        #[arg(long, value_name = "FILE")]
        trace: Option<PathBuf>,
        /// Solve directly instead of failing on regular bipartite graphs.
        #[arg(long)]
        fallback_direct: bool,
    },
    /// Report connectivity, bipartiteness, regularity and spectral data.
    Diagnose {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Generalized row sum, by direct solve or by truncated series.
    Grs {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        grs: GrsArgs,
        /// Sum the power series up to this many terms instead of solving.
        #[arg(long, value_name = "K")]
        series: Option<usize>,
    },
    /// Positional power of a dominance digraph.
    PositionalPower {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = 10_000)]
        max_iter: usize,
        /// Decay denominator a (weights 1/a); must exceed n - 1. Defaults to n.
        #[arg(long, value_name = "A")]
        decay: Option<f64>,
    },
    /// Convert a digraph to the aggregated results/matches format.
    ConvertDigraph {
        #[command(flatten)]
        input: InputArgs,
    },
    /// Side-by-side table of all rating methods.
    Compare {
        #[command(flatten)]
        input: InputArgs,
        #[command(flatten)]
        grs: GrsArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Input CSV; reads standard input when omitted.
    pub file: Option<PathBuf>,
    /// Input dialect; detected from the header when omitted.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Ratings closer than this are ranked as ties.
    #[arg(long, default_value_t = DEFAULT_TIE_TOL)]
    pub tie_tol: f64,
    /// Count a pair of opposite digraph edges as two drawn matches instead of one.
    #[arg(long)]
    pub mutual_two_matches: bool,
}

#[derive(Debug, Clone, Args)]
pub struct GrsArgs {
    /// GRS parameter; defaults to 1 / (2m(n - 1)).
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Number of rounds m; defaults to the ceiling of the largest match count.
    #[arg(long)]
    pub rounds: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolveMethod {
    Score,
    Ls,
    Grs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Rounds,
    Aggregated,
    Digraph,
}

impl From<Format> for InputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Rounds => InputFormat::Rounds,
            Format::Aggregated => InputFormat::Aggregated,
            Format::Digraph => InputFormat::Digraph,
        }
    }
}
