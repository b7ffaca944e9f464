//! `hetlearn`: sample, fit, complexity, rates, sweep and verify from the
//! command line.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver did not converge,
//! 4 a `--check` failed, 1 anything else.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
#[cfg(test)]
use clap::CommandFactory;
use hetlearn_harness::{ClassSpec, HarnessError};
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "hetlearn", version, about = "Learning rates under heterogeneous mixture data")]
struct Cli {
    /// Seed for every random stream; overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sweep config (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Evaluate pass/fail checks and exit with status 4 on failure.
    #[arg(long, global = true)]
    check: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ClassArg {
    Linear,
    Lipschitz,
    Convex,
}

#[derive(Debug, Clone, Args)]
struct ClassOpts {
    #[arg(long, value_enum, default_value = "lipschitz")]
    class: ClassArg,
    /// Dimension of the linear class.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Lipschitz constant.
    #[arg(long, default_value_t = 1.0)]
    l: f64,
}

impl ClassOpts {
    fn spec(&self) -> ClassSpec {
        match self.class {
            ClassArg::Linear => ClassSpec::Linear { d: self.d },
            ClassArg::Lipschitz => ClassSpec::Lipschitz { l: self.l },
            ClassArg::Convex => ClassSpec::ConvexLipschitz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ComplexityArg {
    RademacherL2,
    RademacherL1,
    GaussianLinear,
    GaussianLipschitz,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a labelled dataset from a two-component covariate mixture.
    Sample {
        #[command(flatten)]
        class: ClassOpts,
        #[arg(long, default_value_t = 100)]
        n: usize,
        /// Target heterogeneity of the covariate mixture.
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        zeta: f64,
    },
    /// Least-squares fit of a dataset written by `sample`.
    Fit {
        #[command(flatten)]
        class: ClassOpts,
        /// Input CSV with columns x0.., y.
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Monte Carlo complexity estimate on a random design.
    Complexity {
        #[arg(long, value_enum)]
        kind: ComplexityArg,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        /// Radius of the weight ball, or localization radius δ.
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 1.0)]
        l: f64,
        #[arg(long, default_value_t = 2000)]
        draws: usize,
    },
    /// Critical radius and γ threshold per sample size.
    Rates {
        #[command(flatten)]
        class: ClassOpts,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256,512,1024")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        zeta: f64,
    },
    /// Run the sweep described by `--config`; writes CSV and a manifest.
    Sweep,
    /// Empirical checks of the concentration lemmas on the default matrix.
    Verify {
        #[arg(long, default_value_t = 10_000)]
        replicates: usize,
    },
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error("{0} check(s) failed")]
    CheckFailed(usize),
}

impl From<hetlearn_core::Error> for CliError {
    fn from(e: hetlearn_core::Error) -> Self {
        Self::Harness(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Harness(e) if e.is_config_error() => 2,
            Self::Harness(e) if e.is_no_convergence() => 3,
            Self::CheckFailed(_) => 4,
            _ => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        if k == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new().num_threads(k).build_global().expect("global pool is configured once");
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let nc = CliError::from(hetlearn_core::Error::NoConvergence { iterations: 10, residual: 1.0 });
        assert_eq!(nc.exit_code(), 3);
        let cfg = CliError::Harness(hetlearn_harness::SweepConfig::from_toml_str("x = 1", None).unwrap_err());
        assert_eq!(cfg.exit_code(), 2);
        assert_eq!(CliError::CheckFailed(1).exit_code(), 4);
        assert_eq!(CliError::Usage("missing".into()).exit_code(), 2);
        assert_eq!(CliError::from(hetlearn_core::Error::ZeroBn).exit_code(), 1);
    }

    #[test]
    fn command_line_parses() {
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["hetlearn", "--seed", "3", "rates", "--class", "linear", "--d", "4", "--n", "10,20"]).unwrap();
        assert_eq!(cli.seed, Some(3));
        assert!(matches!(cli.command, Command::Rates { ref n, .. } if n == &[10, 20]));
    }
}
