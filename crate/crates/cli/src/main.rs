mod inspect;
mod run;
mod serve;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use clusterlens_core::spatial_weights::ContiguityRule;

#[derive(Parser)]
#[command(
    name = "clusterlens",
    version,
    about = "Spatial cluster analysis for areal time series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analysis and write a results file.
    Run(RunArgs),
    /// Serve the dashboard with a results file and its geometry.
    Serve(ServeArgs),
    /// Print cluster labels from a results file.
    Inspect(InspectArgs),
}

#[derive(Args)]
pub struct RunArgs {
    /// GeoJSON FeatureCollection of polygons.
    #[arg(long)]
    geometry: PathBuf,
    /// Long-format CSV of values.
    #[arg(long)]
    data: PathBuf,
    /// Location id column in the CSV; also the GeoJSON property holding the id.
    #[arg(long)]
    id_col: String,
    #[arg(long)]
    time_col: String,
    #[arg(long)]
    value_col: String,
    /// GeoJSON property used as a display name.
    #[arg(long)]
    name_field: Option<String>,
    /// Comma-separated subset of local-moran, local-geary, gi-star, gi.
    #[arg(long, default_value = "local-moran,local-geary,gi-star")]
    methods: String,
    #[arg(long, default_value_t = ContiguityRule::Queen)]
    contiguity: ContiguityRule,
    #[arg(long, default_value_t = 999)]
    permutations: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "results.json")]
    out: PathBuf,
    /// Defaults to the platform cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    /// Keep a quantile sketch of every local permutation distribution.
    #[arg(long)]
    store_local_sketches: bool,
    /// Worker threads; 0 picks one per core.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long)]
    results: PathBuf,
    #[arg(long)]
    geometry: PathBuf,
    /// 0 picks a free port.
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

#[derive(Args)]
pub struct InspectArgs {
    #[arg(long)]
    results: PathBuf,
    /// Location id; global labels are shown without it.
    #[arg(long)]
    location: Option<String>,
    /// Restrict the table to one timestep.
    #[arg(long)]
    timestep: Option<String>,
}

/// A failure with its exit code: 1 for bad input, 2 for runtime problems.
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Run(args) => run::run(args),
        Command::Serve(args) => serve::serve(args),
        Command::Inspect(args) => inspect::inspect(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
