//! `zinb-nngp`: simulate panels, fit the spatiotemporal ZINB model, and
//! summarize posterior draws.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use manifest::ErrorRecord;

/// Environment variable naming the output directory when `--out` is absent.
pub const OUT_ENV: &str = "ZINB_NNGP_OUT";

#[derive(Parser, Debug)]
#[command(name = "zinb-nngp", version, about = "Spatiotemporal zero-inflated negative binomial models fitted by Pólya-Gamma Gibbs sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a synthetic panel and its true parameters.
    Simulate(SimulateArgs),
    /// Run one or more Gibbs chains on a panel CSV.
    Fit(FitArgs),
    /// Summarize retained draws, optionally against the truth.
    Summarize(SummarizeArgs),
}

#[derive(Args, Debug)]
struct OutArg {
    /// Output directory (falls back to $ZINB_NNGP_OUT)
    #[arg(long, env = OUT_ENV)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// TOML file with a [design] section; overrides --preset
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in design: sim1, sim2 or sim3
    #[arg(long, default_value = "sim3")]
    pub preset: String,
    /// Multiply the number of locations and times by this factor
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    /// Panel CSV
    #[arg(long)]
    pub data: PathBuf,
    /// TOML run configuration (schema, priors, chain)
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Total iterations per chain, burn-in included
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long)]
    pub burn: Option<usize>,
    #[arg(long)]
    pub thin: Option<usize>,
    /// Independent chains, run in parallel
    #[arg(long, default_value_t = 1)]
    pub chains: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    /// A chain directory, or a fit output directory whose chains are pooled
    #[arg(long)]
    pub samples: PathBuf,
    /// Truth JSON written by `simulate`
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Panel CSV; needed for --fitted and --rr
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// TOML run configuration, for the CSV schema
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write fitted-count tables
    #[arg(long)]
    pub fitted: bool,
    /// CSV with `location` and `group` columns; writes risk-ratio trajectories
    #[arg(long)]
    pub rr: Option<PathBuf>,
    /// Reference group for --rr (default: first group name in sorted order)
    #[arg(long)]
    pub reference: Option<String>,
    #[command(flatten)]
    out: OutArg,
}

/// Failure classes, in exit-code order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Config,
    Data,
    Numerical,
    Other,
}

impl Kind {
    fn exit_code(self) -> u8 {
        match self {
            Kind::Config => 2,
            Kind::Data => 3,
            Kind::Numerical => 4,
            Kind::Other => 1,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Data => "data",
            Kind::Numerical => "numerical",
            Kind::Other => "other",
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: Kind,
    pub message: String,
    pub iteration: Option<usize>,
    pub step: Option<&'static str>,
    pub chain: Option<usize>,
}

impl Failure {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into(), iteration: None, step: None, chain: None }
    }

    pub fn record(&self) -> ErrorRecord {
        ErrorRecord {
            kind: self.kind.name(),
            message: self.message.clone(),
            iteration: self.iteration,
            step: self.step,
            chain: self.chain,
        }
    }
}

impl From<zinb_nngp::Error> for Failure {
    fn from(e: zinb_nngp::Error) -> Self {
        use zinb_nngp::Error as E;
        let kind = match &e {
            E::Config(_) => Kind::Config,
            E::Schema(_) | E::Data(_) | E::Parse { .. } | E::Csv(_) | E::Json(_) | E::Io { .. } => Kind::Data,
            E::Numerical(_) | E::Domain(_) | E::Sampler { .. } => Kind::Numerical,
            E::Contract(_) => Kind::Other,
        };
        let (iteration, step) = match &e {
            E::Sampler { iteration, step, .. } => (Some(*iteration), Some(*step)),
            _ => (None, None),
        };
        Self { kind, message: e.to_string(), iteration, step, chain: None }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::new(Kind::Other, format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => {
            let out = a.out.out.clone();
            commands::simulate(&a, &out)
        }
        Command::Fit(a) => {
            let out = a.out.out.clone();
            commands::fit(&a, &out)
        }
        Command::Summarize(a) => {
            let out = a.out.out.clone();
            commands::summarize(&a, &out)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error ({}): {}", f.kind.name(), f.message);
            ExitCode::from(f.kind.exit_code())
        }
    }
}
