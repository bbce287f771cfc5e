use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::failure::{CliResult, Failure};
use crate::input::Method;
use qhitting_core::Tolerance;

#[derive(Debug, Parser)]
#[command(name = "qhitting", version, about = "Mean hitting times of positive trace-preserving maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Print a JSON record instead of a table
    #[arg(long, global = true)]
    pub json: bool,
    /// Significant digits shown in tables
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    pub digits: u8,
    /// Absolute and relative tolerance
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for positivity sampling and Monte Carlo
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Read stochastic matrices with rows summing to one
    #[arg(long, global = true)]
    pub row_stochastic: bool,
}

impl Global {
    pub fn digits(&self) -> usize {
        self.digits as usize
    }

    /// `--tol` if given, otherwise `fallback`, otherwise the library default.
    pub fn tolerance(&self, fallback: Option<f64>) -> CliResult<Tolerance> {
        match self.tol.or(fallback) {
            None => Ok(Tolerance::default()),
            Some(t) if t.is_finite() && t > 0.0 => Ok(Tolerance::uniform(t)?),
            Some(t) => Err(Failure::parse(format!("tolerance must be positive and finite, got {t}"))),
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check trace preservation, positivity and irreducibility of a map
    Validate { file: PathBuf },
    /// Mean hitting time of an arrival subspace
    Hit {
        map: PathBuf,
        query: PathBuf,
        /// Route to evaluate; overrides the query file
        #[arg(long, value_enum)]
        method: Option<Method>,
        /// Require the initial state to be orthogonal to the subspace
        #[arg(long)]
        orthogonal: bool,
    },
    /// Hitting and return times of a stochastic matrix
    Classical {
        file: PathBuf,
        #[command(subcommand)]
        query: ClassicalQuery,
        /// Add a Monte Carlo estimate with this many trajectories
        #[arg(long, global = true)]
        trials: Option<u64>,
    },
    /// Run the built-in reference checks
    Selftest {
        #[arg(long, hide = true)]
        perturb: bool,
    },
}

#[derive(Debug, Clone, Subcommand)]
pub enum ClassicalQuery {
    /// Mean first-passage time from one state to another
    Mhtf {
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
    },
    /// Mean return time
    Kac {
        #[arg(long)]
        state: usize,
    },
    /// Mean hitting time from an initial distribution
    Dist {
        #[arg(long, value_delimiter = ',', required = true)]
        distribution: Vec<f64>,
        #[arg(long)]
        to: usize,
    },
    /// Mean hitting time of a set of states
    Subset {
        #[arg(long)]
        from: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        set: Vec<usize>,
    },
}
