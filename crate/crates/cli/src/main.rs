use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lagdep_core::normalize::NormKind;
use lagdep_core::pca::PoolMode;

use lagdep_cli::config::RunConfig;
use lagdep_cli::error::Result;
use lagdep_cli::run::{cmd_analyze, cmd_causality, cmd_synth, RunSummary};

#[derive(Parser)]
#[command(
    name = "lagdep",
    version,
    about = "Lag-dependent dependency features and directed screening for time-series pairs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lag sweep, feature extraction, and contribution maps for all pairs
    Analyze(AnalyzeArgs),
    /// Directed dependency screening over ordered channel pairs
    Causality(CausalityArgs),
    /// Generate a synthetic recording from a JSON spec
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Interior,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Basic,
    Predicted,
}

#[derive(Args)]
struct SharedArgs {
    /// Input CSV recording
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory for reports and plots
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// JSON config file; flags override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// Channel subset, comma separated
    #[arg(long, value_delimiter = ',')]
    channels: Option<Vec<String>>,
    /// Non-signal column to skip (autodetected when omitted)
    #[arg(long)]
    id_column: Option<String>,
    /// Samples per second of the recording
    #[arg(long)]
    sample_rate_hz: Option<f64>,
    /// Highest basis degree m
    #[arg(long)]
    degree: Option<usize>,
    /// Number of leading features r
    #[arg(long)]
    top_r: Option<usize>,
    /// Which coefficient block to pool
    #[arg(long, value_enum)]
    pool: Option<PoolArg>,
    /// Keep per-entry means when pooling
    #[arg(long)]
    no_center: bool,
    /// Keep the product of marginals in interior entries
    #[arg(long)]
    no_marginal_removal: bool,
    /// Normalization for correlation analysis
    #[arg(long, value_enum)]
    norm: Option<NormArg>,
    /// Autoregressive order of predictive normalization
    #[arg(long)]
    ar_order: Option<usize>,
    /// Candidate tail weights, comma separated
    #[arg(long, value_delimiter = ',')]
    nu_grid: Option<Vec<f64>>,
    /// Candidate adaptation rates, comma separated
    #[arg(long, value_delimiter = ',')]
    ema_grid: Option<Vec<f64>>,
    /// Samples per axis of contribution heatmaps
    #[arg(long)]
    grid_resolution: Option<usize>,
    /// Upper bound on analyzed pairs
    #[arg(long)]
    max_pairs: Option<usize>,
    /// Worker threads (library default when omitted)
    #[arg(long)]
    workers: Option<usize>,
    /// Recorded run seed
    #[arg(long)]
    seed: Option<u64>,
    /// Scale each plotted curve by its peak magnitude
    #[arg(long)]
    normalize_curves: bool,
    /// Skip CSV artifacts
    #[arg(long)]
    no_csv: bool,
    /// Skip SVG artifacts
    #[arg(long)]
    no_svg: bool,
    /// Also write compact binary coefficient tensors
    #[arg(long)]
    emit_binary: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Lag window half-width in seconds
    #[arg(long)]
    max_lag_seconds: Option<f64>,
}

#[derive(Args)]
struct CausalityArgs {
    #[command(flatten)]
    shared: SharedArgs,
    /// Delays reported in the map, in samples, comma separated
    #[arg(long, value_delimiter = ',')]
    delays: Option<Vec<i64>>,
    /// Sweep bound in samples (max of --delays when omitted)
    #[arg(long)]
    max_delay: Option<i64>,
}

#[derive(Args)]
struct SynthArgs {
    /// JSON synthesis spec
    #[arg(long)]
    spec: PathBuf,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn resolve(shared: &SharedArgs) -> Result<RunConfig> {
    let mut cfg = match &shared.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &shared.input {
        cfg.input = Some(v.clone());
    }
    if let Some(v) = &shared.out {
        cfg.output_dir = Some(v.clone());
    }
    if let Some(v) = &shared.channels {
        cfg.channels = Some(v.clone());
    }
    if let Some(v) = &shared.id_column {
        cfg.id_column = Some(v.clone());
    }
    if let Some(v) = shared.sample_rate_hz {
        cfg.sample_rate_hz = v;
    }
    if let Some(v) = shared.degree {
        cfg.degree = v;
    }
    if let Some(v) = shared.top_r {
        cfg.top_r = v;
    }
    if let Some(v) = shared.pool {
        cfg.pool = match v {
            PoolArg::Interior => PoolMode::Interior,
            PoolArg::Full => PoolMode::Full,
        };
    }
    if shared.no_center {
        cfg.center = false;
    }
    if shared.no_marginal_removal {
        cfg.marginal_removal = false;
    }
    if let Some(v) = shared.norm {
        cfg.norm = match v {
            NormArg::Basic => NormKind::Basic,
            NormArg::Predicted => NormKind::Predicted,
        };
    }
    if let Some(v) = shared.ar_order {
        cfg.ar_order = v;
    }
    if let Some(v) = &shared.nu_grid {
        cfg.nu_grid = v.clone();
    }
    if let Some(v) = &shared.ema_grid {
        cfg.ema_grid = v.clone();
    }
    if let Some(v) = shared.grid_resolution {
        cfg.grid_resolution = v;
    }
    if let Some(v) = shared.max_pairs {
        cfg.max_pairs = v;
    }
    if let Some(v) = shared.workers {
        cfg.workers = Some(v);
    }
    if let Some(v) = shared.seed {
        cfg.seed = v;
    }
    if shared.normalize_curves {
        cfg.normalize_curves = true;
    }
    if shared.no_csv {
        cfg.formats.csv = false;
    }
    if shared.no_svg {
        cfg.formats.svg = false;
    }
    if shared.emit_binary {
        cfg.formats.binary = true;
    }
    Ok(cfg)
}

fn dispatch(cli: Cli) -> Result<RunSummary> {
    match cli.command {
        Command::Analyze(args) => {
            let mut cfg = resolve(&args.shared)?;
            if let Some(v) = args.max_lag_seconds {
                cfg.max_lag_seconds = v;
            }
            cmd_analyze(&cfg)
        }
        Command::Causality(args) => {
            let mut cfg = resolve(&args.shared)?;
            if let Some(v) = &args.delays {
                cfg.delays = v.clone();
            }
            if let Some(v) = args.max_delay {
                cfg.max_delay = Some(v);
            }
            cmd_causality(&cfg)
        }
        Command::Synth(args) => cmd_synth(&args.spec, &args.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(summary) => {
            println!(
                "wrote {} files to {}",
                summary.files.len(),
                summary.output_dir.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
