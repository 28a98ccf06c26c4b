//! `msdenoise` command-line front end. Every command is a pure function of
//! its inputs, flags and `--seed`; thread count follows `RAYON_NUM_THREADS`.

mod commands;
mod error;
mod io;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use msdenoise::BandwidthRule;
use serde::Serialize;

use crate::io::Dataset;

#[derive(Debug, Parser)]
#[command(name = "msdenoise", version = report::VERSION, about = "Mean shift denoising toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Shift every row of a CSV file with its own KDE.
    Denoise(DenoiseArgs),
    /// Clustering ARI before and after denoising, over replicates.
    ClusterEval(ClusterEvalArgs),
    /// Two-sample power curves before and after denoising.
    Twosample(TwosampleArgs),
    /// Path-length anomaly scores.
    Anomaly(AnomalyArgs),
    /// Monte Carlo checks of the concentration properties.
    Theory(TheoryArgs),
    /// Write a simulated dataset as CSV (coordinates plus a label column).
    Generate(GenerateArgs),
}

/// Bandwidth given as a positive number, `scv` or `normal-scale`.
fn parse_bandwidth(s: &str) -> Result<BandwidthRule, String> {
    match s {
        "scv" => Ok(BandwidthRule::Scv),
        "normal-scale" => Ok(BandwidthRule::NormalScale),
        _ => match s.parse::<f64>() {
            Ok(h) if h.is_finite() && h > 0.0 => Ok(BandwidthRule::Fixed(h)),
            _ => Err(format!("expected a positive number, `scv` or `normal-scale`, got {s:?}")),
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Switch {
    On,
    Off,
}

impl Switch {
    fn on(self) -> bool {
        self == Switch::On
    }
}

#[derive(Debug, Args, Serialize)]
struct DenoiseArgs {
    /// Input CSV (numeric columns, optional header row).
    #[arg(long)]
    input: PathBuf,
    /// Output CSV; rows keep their order and the header is copied.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value = "scv", value_parser = parse_bandwidth)]
    h: BandwidthRule,
    #[arg(long, default_value_t = 1)]
    sweeps: usize,
    /// Recorded for provenance; denoising itself draws no random numbers.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Optional JSON summary path (stdout when omitted).
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Algo {
    Kmeans,
    Spectral,
    Hier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum LinkageArg {
    Single,
    Complete,
    Average,
    Ward,
}

#[derive(Debug, Args, Serialize)]
struct ClusterEvalArgs {
    /// Simulated case: bullseye1..3 or spiral4..6.
    #[arg(long, conflicts_with = "input")]
    case: Option<String>,
    /// CSV whose last column holds the true class labels.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Validate `--input` against a known real dataset shape.
    #[arg(long, value_enum, requires = "input")]
    dataset: Option<Dataset>,
    /// Keep real-dataset features unstandardized.
    #[arg(long)]
    raw: bool,
    #[arg(long, value_enum, default_value = "spectral")]
    algo: Algo,
    /// Number of clusters (defaults to 2 for simulated cases, 7/5/3 for
    /// olive/banknote/seeds and the number of distinct labels otherwise).
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_enum, default_value = "on")]
    msd: Switch,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bandwidth for denoising (defaults to `scv`, or to the documented
    /// bandwidth of a named dataset).
    #[arg(long, value_parser = parse_bandwidth)]
    h: Option<BandwidthRule>,
    #[arg(long, default_value_t = 1)]
    sweeps: usize,
    #[arg(long, value_enum, default_value = "average")]
    linkage: LinkageArg,
    /// Spectral affinity scale as a multiple of the data's SCV bandwidth.
    #[arg(long, default_value_t = 0.6)]
    sigma_factor: f64,
    /// Sparsify the spectral affinity to a symmetric k-nearest-neighbour graph.
    #[arg(long)]
    knn: Option<usize>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Scenario {
    /// Second sample gets N1 extra uniform points.
    UniformNoise,
    /// First sample's mixture weight varies, second keeps 0.5.
    MixtureProportion,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum TestArg {
    Energy,
    Mmd,
}

#[derive(Debug, Args, Serialize)]
struct TwosampleArgs {
    #[arg(long, value_enum, default_value = "uniform-noise")]
    scenario: Scenario,
    /// Comma-separated grid (noise counts or mixture weights); defaults to
    /// 0,100,..,500 or 0.5,0.45,..,0.2.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "energy")]
    test: TestArg,
    #[arg(long, value_enum, default_value = "on")]
    msd: Switch,
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, default_value_t = 1000)]
    n0: usize,
    #[arg(long, default_value_t = msdenoise::twosample::POWER_PERMUTATIONS)]
    permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the power curve as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct AnomalyArgs {
    /// Input CSV; the built-in three-blob scenario is used when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "scv", value_parser = parse_bandwidth)]
    h: BandwidthRule,
    /// Convergence tolerance (defaults to 1e-7 times the mean coordinate sd).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 500)]
    max_iter: usize,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Trajectory CSV with one row per visited position.
    #[arg(long)]
    traces: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Check {
    T1,
    T2,
    T4,
    T5,
    T6,
    Ascent,
}

#[derive(Debug, Args, Serialize)]
struct TheoryArgs {
    #[arg(long, value_enum)]
    check: Check,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct GenerateArgs {
    /// bullseye1..3, spiral4..6 or anomaly.
    #[arg(long)]
    case: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Denoise(a) => commands::denoise(a),
        Command::ClusterEval(a) => commands::cluster_eval(a),
        Command::Twosample(a) => commands::twosample(a),
        Command::Anomaly(a) => commands::anomaly(a),
        Command::Theory(a) => commands::theory(a),
        Command::Generate(a) => commands::generate(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("msdenoise: property check failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("msdenoise: {e}");
            ExitCode::FAILURE
        }
    }
}
