//! `sfn` — build scale-free overlay networks, cluster them around
//! high-degree cores, and measure how close the result is to the target
//! degree distribution. Every command is reproducible: the same flags and
//! seed give byte-identical outputs.

mod commands;
mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "sfn", version, about = "Scale-free overlay network toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an overlay network and write its edge list plus a run report
    Build(BuildArgs),
    /// Assign server nodes to clusters around high-degree core nodes
    Cluster(ClusterArgs),
    /// Compare a graph's degree distribution against the theoretical power law
    Stats(StatsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Master process with a global view
    Centralized,
    /// Neighbor-local algorithms (biased walks, message passing)
    Distributed,
}

impl Mode {
    fn as_str(self) -> &'static str {
        match self {
            Mode::Centralized => "centralized",
            Mode::Distributed => "distributed",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlphaConventionArg {
    /// alpha = 1 / (gamma - 1)
    Goh,
    /// alpha = 1 / (1 - gamma)
    AsWritten,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExponentGroupingArg {
    /// id-ratio exponent 1 / (alpha * gamma - 1)
    AlphaGammaMinusOne,
    /// id-ratio exponent 1 / (gamma - 1)
    GammaMinusOne,
}

#[derive(Clone, Copy, ValueEnum)]
enum TieBreakArg {
    /// Seeded uniform choice among equally distant cores
    Random,
    /// Deterministic lowest core id (matches the distributed protocol)
    LowestId,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Number of nodes
    #[arg(long)]
    n: u32,
    /// Target power-law exponent
    #[arg(long)]
    gamma: f64,
    /// Iteration budget: a plain count or a multiple of n like `1.4N`
    /// (centralized mode; default 1.4N)
    #[arg(long)]
    iters: Option<String>,
    /// Stop when the trace distance drops below this value instead of
    /// running a fixed budget (centralized mode)
    #[arg(long, conflicts_with = "iters")]
    epsilon: Option<f64>,
    /// Hops per biased walk (distributed mode)
    #[arg(long, default_value_t = 10)]
    walk_length: u32,
    #[arg(long, value_enum, default_value_t = AlphaConventionArg::Goh)]
    alpha_convention: AlphaConventionArg,
    #[arg(long, value_enum, default_value_t = ExponentGroupingArg::AlphaGammaMinusOne)]
    exponent_grouping: ExponentGroupingArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Edge-list output path
    #[arg(long)]
    out: PathBuf,
    /// Run-report path; defaults to `<out>.report.json`
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// Edge-list file produced by `build`
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    mode: Mode,
    /// Degree threshold separating core from server nodes
    #[arg(long)]
    threshold: u32,
    /// Maximum hop radius for cluster membership
    #[arg(long, default_value_t = 10)]
    dmax: u32,
    /// Decision timeout for the distributed protocol; defaults to
    /// 4 * dmax * max-delay
    #[arg(long)]
    tau_end: Option<f64>,
    /// Link delay model: `fixed:D` or `uniform:LO:HI`
    #[arg(long, default_value = "uniform:0.5:1.5")]
    delay: String,
    /// How equally distant cores are chosen between (centralized mode)
    #[arg(long, value_enum, default_value_t = TieBreakArg::Random)]
    tie_break: TieBreakArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Assignment JSON output path
    #[arg(long)]
    out: PathBuf,
    /// Run-report path; defaults to `<out>.report.json`
    #[arg(long)]
    report: Option<PathBuf>,
    /// Event-trace output (line-delimited JSON, distributed mode)
    #[arg(long)]
    trace_out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    /// Edge-list file to analyze
    #[arg(long, required_unless_present = "sweep")]
    input: Option<PathBuf>,
    /// Exponent of the theoretical distribution; defaults to the value in
    /// the edge-list header
    #[arg(long)]
    gamma: Option<f64>,
    /// Rebuild centrally at iteration budgets `LO:HI:STEP` (multiples of n)
    /// and emit the distance per budget
    #[arg(long, conflicts_with = "input")]
    sweep: Option<String>,
    /// Node count for `--sweep`
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SFN_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Build(args) => commands::build(args),
        Command::Cluster(args) => commands::cluster(args),
        Command::Stats(args) => commands::stats(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
