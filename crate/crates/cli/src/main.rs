use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;
mod output;

use output::{CliError, Report};

/// Exact word metrics, arc embeddings, distortion scans and lower bounds for
/// the lamplighter groups C₂≀Cₙ, plus character embeddings of invariant
/// metrics on finite Abelian groups.
#[derive(Parser, Debug, Serialize)]
#[command(name = "lamplighter", version)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Seed for every sampled quantity.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Run single-threaded regardless of --threads.
    #[arg(long, global = true)]
    sequential: bool,

    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write a per-element CSV dump.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
enum Command {
    /// Compare BFS against the travel planner and report the surrogate band.
    WordMetricCheck(WordMetricArgs),
    /// Measure the distortion of the arc embedding.
    EmbedDistortion(EmbedArgs),
    /// Average a map over left translations and refactor the kernel.
    Symmetrize(SymmetrizeArgs),
    /// Representation-averaging lower bound.
    LowerBound(LowerBoundArgs),
    /// Spectral lower bound for random movement sets.
    Zigzag(ZigzagArgs),
    /// Fourier weights and L_p character embedding of an invariant metric.
    AbelianLp(AbelianArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct WordMetricArgs {
    #[arg(long)]
    pub n: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ScanKind {
    Exact,
    Reduced,
    Sampled,
}

#[derive(Args, Debug, Serialize)]
pub struct EmbedArgs {
    #[arg(long)]
    pub n: usize,
    /// exact: all pairs; reduced: all (g, e); sampled: seeded uniform pairs.
    #[arg(long, value_enum, default_value_t = ScanKind::Reduced)]
    pub mode: ScanKind,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct SymmetrizeArgs {
    /// JSON file: {"n": 3, "values": [{"lamps": [0], "pos": 1, "vector": [..]}, ..]}.
    #[arg(long)]
    pub input: PathBuf,
}

#[derive(Args, Debug, Serialize)]
pub struct LowerBoundArgs {
    #[arg(long)]
    pub n: usize,
    /// Movement steps; the toggle is always included.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub gens: Vec<usize>,
    /// Check every listed label instead of the reduced list.
    #[arg(long)]
    pub full: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum RhoMode {
    Exact,
    Estimate,
}

#[derive(Args, Debug, Serialize)]
pub struct ZigzagArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, value_enum, default_value_t = RhoMode::Estimate)]
    pub mode: RhoMode,
    /// Base of the logarithm in the |S| ≥ 100·log n admissibility flag.
    #[arg(long, default_value_t = std::f64::consts::E)]
    pub log_base: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct AbelianArgs {
    #[arg(long, value_delimiter = ',', conflicts_with = "cycle", required_unless_present = "cycle")]
    pub moduli: Option<Vec<usize>>,
    #[arg(long)]
    pub cycle: Option<usize>,
    /// hamming, cycle, or file:<path> with rows x₁,…,x_d,value.
    #[arg(long, default_value = "cycle")]
    pub metric: String,
    #[arg(long, default_value_t = 1.5)]
    pub p: f64,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return CliError::Cli(e.to_string()).emit(),
    };
    let threads = cli.threads;
    match lamplighter::par::with_threads(threads, || run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.emit(),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let exec = if cli.sequential { lamplighter::Exec::Sequential } else { lamplighter::Exec::Parallel };
    let ctx = commands::Ctx { seed: cli.seed, exec, csv: cli.csv.as_deref() };
    let payload = match &cli.command {
        Command::WordMetricCheck(a) => commands::word_metric_check(a, &ctx)?,
        Command::EmbedDistortion(a) => commands::embed_distortion(a, &ctx)?,
        Command::Symmetrize(a) => commands::symmetrize(a, &ctx)?,
        Command::LowerBound(a) => commands::lower_bound(a, &ctx)?,
        Command::Zigzag(a) => commands::zigzag(a, &ctx)?,
        Command::AbelianLp(a) => commands::abelian_lp(a, &ctx)?,
    };
    Report::new(cli, payload).write(cli.out.as_deref())
}
