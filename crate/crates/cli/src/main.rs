//! `clusterkit`: graph counts, identity checks, convergence radii and series tables.

mod commands;
mod config;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::Format;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] clusterkit::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(
    name = "clusterkit",
    version,
    about = "Cluster-expansion graph sums, recurrences and convergence radii"
)]
struct Cli {
    /// `key = value` file supplying defaults for any option.
    #[arg(long, global = true, env = "CLUSTERKIT_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json", env = "CLUSTERKIT_FORMAT")]
    format: Format,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, default_value_t = 1, env = "CLUSTERKIT_THREADS")]
    threads: usize,
    /// Write the report here instead of stdout.
    #[arg(long, global = true, env = "CLUSTERKIT_OUTPUT")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Count graphs in a class, optionally with weights at a configuration.
    Enumerate(EnumerateArgs),
    /// Run an identity or inequality suite; exit status 1 on failure.
    Verify(VerifyArgs),
    /// Convergence radius of a criterion.
    Radius(RadiusArgs),
    /// Coefficient table of a density or activity series.
    Series(SeriesArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphClass {
    All,
    Connected,
    #[value(alias = "two_connected", alias = "2-connected")]
    TwoConnected,
    #[value(alias = "D")]
    D,
    #[value(alias = "C")]
    C,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long, env = "CLUSTERKIT_N")]
    pub n: usize,
    #[arg(long, value_enum, default_value = "all", env = "CLUSTERKIT_CLASS")]
    pub class: GraphClass,
    /// White vertices (1-based) for the D and C classes.
    #[arg(long, value_delimiter = ',')]
    pub white: Vec<usize>,
    /// Black vertices (1-based) for the D and C classes.
    #[arg(long, value_delimiter = ',')]
    pub black: Vec<usize>,
    /// Positions on the line; prints the weight of every graph in the class.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub points: Vec<f64>,
    #[command(flatten)]
    pub potential: PotentialArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PotentialKind {
    Rods,
    Disks,
    Spheres,
    Shoulder,
    Zero,
}

#[derive(Debug, Args)]
pub struct PotentialArgs {
    #[arg(long, value_enum, default_value = "rods", env = "CLUSTERKIT_POTENTIAL")]
    pub potential: PotentialKind,
    #[arg(long, default_value_t = 1.0, env = "CLUSTERKIT_SIGMA")]
    pub sigma: f64,
    /// Shoulder height (shoulder potential only).
    #[arg(long, default_value_t = 1.0, env = "CLUSTERKIT_HEIGHT")]
    pub height: f64,
    /// Dimension of the shoulder potential.
    #[arg(long, default_value_t = 1, env = "CLUSTERKIT_DIM")]
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Prop31,
    Prop32,
    Mobius,
    Lemma21,
    Horeka,
    Ks,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub suite: Suite,
    #[arg(long, default_value_t = 3, env = "CLUSTERKIT_MIN_N")]
    pub min_n: usize,
    /// Largest size: vertices (prop31, lemma21), #W+#B (prop32), ground set (mobius).
    #[arg(long, env = "CLUSTERKIT_MAX_N")]
    pub max_n: Option<usize>,
    /// Random cases per size; defaults to 100 (prop31), 50 (prop32), 20 (mobius).
    #[arg(long, env = "CLUSTERKIT_SAMPLES")]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 1, env = "CLUSTERKIT_SEED")]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9, env = "CLUSTERKIT_TOLERANCE")]
    pub tolerance: f64,
    /// Densities (horeka: all of them; ks: the first).
    #[arg(long, value_delimiter = ',', env = "CLUSTERKIT_RHO")]
    pub rho: Vec<f64>,
    #[arg(long, default_value_t = 0.05, env = "CLUSTERKIT_H")]
    pub h: f64,
    /// Largest number of root points (horeka), or the number of points (ks).
    #[arg(long, env = "CLUSTERKIT_S")]
    pub s: Option<usize>,
    #[arg(long, default_value_t = 2, env = "CLUSTERKIT_ORDER")]
    pub order: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    Lp,
    Groeneveld,
    Nf,
}

#[derive(Debug, Args)]
pub struct RadiusArgs {
    #[arg(value_enum)]
    pub criterion: Criterion,
    /// `∫|f|` (lp, groeneveld).
    #[arg(long = "C", alias = "c", default_value_t = 1.0, env = "CLUSTERKIT_C")]
    pub c: f64,
    /// `e^{2B}` (lp, groeneveld).
    #[arg(long, default_value_t = 1.0, env = "CLUSTERKIT_U")]
    pub u: f64,
    /// Disk diameter (nf).
    #[arg(long, default_value_t = 1.0, env = "CLUSTERKIT_SIGMA")]
    pub sigma: f64,
    /// Monte Carlo samples per Ψ coefficient (nf).
    #[arg(long, default_value_t = 10_000_000, env = "CLUSTERKIT_SAMPLES")]
    pub samples: u64,
    #[arg(long, default_value_t = 1, env = "CLUSTERKIT_SEED")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    /// `d_n`: 2-connected coefficients.
    D,
    /// Activity as a series in the density.
    Z,
    /// Density as a series in the activity.
    Density,
    /// Rooted connected coefficients `b̃_n`.
    Ursell,
    /// `ḡ` coefficients at `--points`.
    Gbar,
    /// `g` coefficients at `--points`.
    G,
    /// `α` coefficients at `--points`.
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IntegrationMethod {
    Grid,
    Mc,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(value_enum)]
    pub quantity: Quantity,
    #[arg(long, default_value_t = 3, env = "CLUSTERKIT_ORDER")]
    pub order: usize,
    /// Root positions for gbar, g and alpha (one coordinate per point on the line,
    /// `x:y` pairs in the plane).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    pub points: Vec<String>,
    #[command(flatten)]
    pub potential: PotentialArgs,
    #[arg(long, value_enum, default_value = "grid", env = "CLUSTERKIT_METHOD")]
    pub method: IntegrationMethod,
    #[arg(long, default_value_t = 0.01, env = "CLUSTERKIT_H")]
    pub h: f64,
    #[arg(long, default_value_t = 1_000_000, env = "CLUSTERKIT_SAMPLES")]
    pub samples: u64,
    #[arg(long, default_value_t = 1, env = "CLUSTERKIT_SEED")]
    pub seed: u64,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    if cli.threads == 0 {
        return Err(CliError::Usage("--threads must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let (report, passed) = match &cli.command {
        Command::Enumerate(a) => (commands::enumerate(a, cli.threads)?, true),
        Command::Verify(a) => commands::verify(a)?,
        Command::Radius(a) => (commands::radius(a)?, true),
        Command::Series(a) => (commands::series(a)?, true),
    };
    match &cli.output {
        Some(path) => {
            let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
            report.write(cli.format, &mut f)?;
            f.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            report.write(cli.format, &mut lock)?;
        }
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::locate(&args) {
        if let Err(e) = config::apply(path.as_ref()) {
            eprintln!("clusterkit: {e}");
            return ExitCode::from(2);
        }
    }
    let cli = Cli::parse_from(&args);
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("clusterkit: {e}");
            ExitCode::from(2)
        }
    }
}
