//! `sievelab`: one subcommand per figure dataset.
//!
//! Exit codes: 0 success, 1 usage, 2 domain error, 3 resource error, 4 I/O error.

mod checkpoint;
mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sievelab::Error;

#[derive(Parser, Debug)]
#[command(
    name = "sievelab",
    version,
    about = "Prime counts on the sieve intervals s_k = [p_k^2, p_{k+1}^2 - 1]"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Output directory
    #[arg(long, global = true, default_value = ".", env = "SIEVELAB_OUT")]
    pub out: PathBuf,

    /// Seed for sampled random models
    #[arg(long, global = true, default_value_t = 0, env = "SIEVELAB_SEED")]
    pub seed: u64,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "SIEVELAB_THREADS")]
    pub threads: Option<usize>,

    /// Sieve segment length in entries
    #[arg(long, global = true, default_value_t = sievelab::sieve::DEFAULT_SEGMENT_LEN, env = "SIEVELAB_SEGMENT_SIZE")]
    pub segment_size: usize,
}

#[derive(Args, Debug, Clone)]
pub struct KmaxArgs {
    /// Largest interval index
    #[arg(long, env = "SIEVELAB_KMAX", value_parser = clap::value_parser!(u64).range(1..))]
    pub kmax: u64,

    /// Checkpoint file; resumed from when present, rewritten after each chunk
    #[arg(long, env = "SIEVELAB_CHECKPOINT")]
    pub checkpoint: Option<PathBuf>,

    /// Intervals per checkpoint chunk
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub chunk: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Interval records and deviations: intervals.csv, deviations.csv
    Intervals {
        #[command(flatten)]
        k: KmaxArgs,
        /// Subtract 2 (for the primes 2 and 3) from 2 e^-gamma li(x)
        #[arg(long, env = "SIEVELAB_COUNT_OFFSET")]
        count_offset: bool,
    },
    /// Maier-window ratio scans: maier_k<k>.csv, maier_summary.csv, phi_crossings.csv
    Maier {
        /// Interval indices
        #[arg(long = "k", value_delimiter = ',', default_value = "500,750,1000")]
        ks: Vec<usize>,
        #[arg(long, default_value_t = 3.0, env = "SIEVELAB_LAMBDA")]
        lambda: f64,
        /// Half-width of the reference band around 1
        #[arg(long, default_value_t = 0.03, env = "SIEVELAB_DELTA_BAND")]
        delta_band: f64,
        /// Sampling step in x (default ceil(Phi/100))
        #[arg(long)]
        step: Option<u64>,
        /// Upper end for the Phi(x) against l_g(x) crossings
        #[arg(long, default_value_t = 10_000_000_000)]
        xmax: u64,
    },
    /// Prime gaps inside one interval: gaps_k<k>.csv
    Gaps {
        #[arg(long = "k", default_value_t = 500)]
        k: usize,
        /// Moving-average run
        #[arg(long, default_value_t = 25)]
        run: usize,
    },
    /// Full and truncated Legendre ratios and term counts: legendre.csv, terms.csv
    Legendre {
        #[arg(long, default_value_t = 1)]
        kmin: usize,
        #[arg(long, env = "SIEVELAB_KMAX", default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        kmax: u64,
    },
    /// Shifted-window model against binomial and Poisson: model.csv, pdf_k<k>.csv
    Randmodel {
        #[arg(long = "k", value_delimiter = ',', default_value = "50")]
        ks: Vec<usize>,
        /// Enumerate every shift when p_k# is at most this
        #[arg(long, default_value = "1e9", value_parser = parse_count, env = "SIEVELAB_BUDGET")]
        budget: u64,
        /// Shifts drawn when sampling
        #[arg(long, default_value = "1e5", value_parser = parse_count, env = "SIEVELAB_SAMPLES")]
        samples: u64,
    },
    /// Bias curves normalized by Delta_k: bias.csv, bias_pdf.csv
    Bias {
        #[command(flatten)]
        k: KmaxArgs,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
    /// Lag correlations of pi_k - li_k: corr.csv, covariance.csv
    Corr {
        #[command(flatten)]
        k: KmaxArgs,
        #[arg(long, default_value_t = 10)]
        max_lag: usize,
        /// Per-block correlations at lag max-lag
        #[arg(long)]
        block: Option<usize>,
    },
    /// |pi(x) - li(x)| against sqrt(li(x)): conjecture.csv
    Conjecture {
        #[command(flatten)]
        k: KmaxArgs,
    },
}

/// Integer, also accepted in scientific form (`1e9`).
fn parse_count(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 => Ok(v as u64),
        _ => Err(format!("not a non-negative integer: {s}")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) => 2,
        Error::Resource(_) => 3,
        Error::Io { .. } => 4,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(1);
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
