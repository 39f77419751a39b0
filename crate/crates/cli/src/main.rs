//! `ladder`: command-line front end for the ladder first-passage toolkit.
//!
//! Exit codes: 0 on success, 2 on usage errors or failed checks, 1 on an
//! internal inconsistency (for example a β or channel assertion).

mod commands;

use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "ladder", version, about = "First-passage percolation on the ladder graph: exact kernels, identities and Monte Carlo")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact coefficient tables a, b, c, d of the n-step kernel.
    Coeffs {
        /// Step count.
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=40))]
        n: u32,
        /// Which engine computes the tables.
        #[arg(long, value_enum, default_value_t = Engine::Genfun)]
        engine: Engine,
    },
    /// Compare the generating-function and recurrence engines exactly.
    VerifyEngines {
        /// Largest step count compared.
        #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u32).range(1..=30))]
        n_max: u32,
    },
    /// Kernel densities on a grid (csv) or quadrature oracle residuals (json).
    Kernel {
        /// Step count.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=12))]
        n: u32,
        /// Grid for r' as lo:hi:count.
        #[arg(long, default_value = "-3:3:61", allow_hyphen_values = true, value_parser = commands::parse_grid)]
        r_prev_grid: commands::Grid,
        /// Grid for r as lo:hi:count.
        #[arg(long, default_value = "-3:3:61", allow_hyphen_values = true, value_parser = commands::parse_grid)]
        r_grid: commands::Grid,
        /// Run oracles for every step 1..=n instead of dumping densities.
        #[arg(long)]
        oracles: bool,
    },
    /// Check the summation identities behind the generating functions.
    Identities {
        /// Series truncation order.
        #[arg(long, default_value_t = 40, value_parser = clap::value_parser!(u32).range(5..=200))]
        k: u32,
    },
    /// Percolation rate: closed form, optionally with a Monte Carlo estimate.
    Rate {
        /// Ladder length.
        #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u32).range(1..))]
        n: u32,
        /// Independent ladders; 0 prints the closed form only.
        #[arg(long, default_value_t = 0)]
        replicates: u32,
        /// Stationary draws for the E f check; 0 skips it.
        #[arg(long, default_value_t = 0)]
        stationary_samples: u64,
    },
    /// Normality of (l_n - nχ)/√n across replicates.
    Clt {
        /// Ladder length (at least 500).
        #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u32).range(500..))]
        n: u32,
        /// Independent ladders (at least 1000).
        #[arg(long, default_value_t = 5000, value_parser = clap::value_parser!(u32).range(1000..))]
        replicates: u32,
    },
    /// Kernel-expansion and batch-means estimates of the CLT variance.
    Variance {
        /// Last covariance term included in the kernel expansion.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u32).range(3..=10))]
        n_max: u32,
        /// Outer Monte Carlo draws for the covariance terms.
        #[arg(long, default_value_t = 2_000_000, value_parser = clap::value_parser!(u64).range(1000..))]
        mc_outer: u64,
        /// Chain length for batch means (at least 10^6).
        #[arg(long, default_value_t = 10_000_000, value_parser = clap::value_parser!(u64).range(1_000_000..))]
        steps: u64,
        /// Discarded initial steps.
        #[arg(long, default_value_t = 1000)]
        burn_in: u64,
        /// Batch length for batch means.
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        batch_size: u64,
    },
    /// Drift ψ of the Lyapunov function 1 - e^{-|r|}.
    Drift {
        /// Grid half width.
        #[arg(long, default_value_t = 10.0)]
        half_width: f64,
        /// Grid spacing.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Genfun,
    Recurrence,
}

/// Rendered report and whether every check in it passed.
pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli.common, &out.text) {
                eprintln!("error: {e:#}");
                return ExitCode::from(1);
            }
            if out.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let internal = e.downcast_ref::<ladder_core::Error>().is_some_and(ladder_core::Error::is_internal);
            ExitCode::from(if internal { 1 } else { 2 })
        }
    }
}

fn emit(common: &Common, text: &str) -> anyhow::Result<()> {
    match &common.out {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(text.as_bytes())?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}
