//! `wedge-lab`: config-driven front end for the wedge heat kernel
//! verification suites. Each subcommand reads one TOML file, writes
//! CSV/JSON reports into the configured output directory, and exits 0
//! when every checked quantity stays within its certified bound, 1 when
//! a verdict fails, 2 on usage or configuration errors.

mod commands;
mod config;
mod report;

use clap::{Parser, Subcommand};
use std::fs;
use std::process::ExitCode;
use wedge_core::WedgeError;

const USAGE_ERROR: u8 = 2;

#[derive(Parser)]
#[command(name = "wedge-lab", version, about = "Verification suites for the heat kernel on planar wedges", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: WEDGE_LAB_WORKERS or all cores).
    /// Reports are byte-identical for any worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Also write `<name>_plot.csv` x/y files for external plotting.
    #[arg(long, global = true)]
    plot_data: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the kernel at one point, with the reflection oracle
    /// where one exists.
    Kernel { config: String },
    /// Downward-σ sweep certifying the two-sided kernel bound ratio.
    GreenBound { config: String },
    /// Supremum study of the boundary/vertex-weighted kernel integral.
    LemmaB1B2S { config: String },
    /// Supremum study of the half-space / whole-space weighted integral.
    LemmaB1A1S { config: String },
    /// Supremum study of the edge-distance-weighted integral.
    LemmaA2S { config: String },
    /// Combined-weight supremum study with parabolic-scaling cross-check.
    LemmaCombined { config: String },
    /// Closed-form check of the scaling integral sup_A ∫ A^α/(A+√s)^{α+2} ds.
    LemmaAt { config: String },
    /// Stochastic maximal-regularity ratio table.
    LpStoch { config: String },
    /// Deterministic maximal-regularity ratio table.
    LpDet { config: String },
    /// Ratio growth as data concentrates toward the vertex (exploratory).
    Sharpness { config: String },
    /// Log-log fit of solution decay along a ray toward the vertex.
    Regularity { config: String },
    /// p = 2 a-priori energy estimate.
    Apriori { config: String },
    /// Cartesian parameter sweep over one of the supremum studies.
    Sweep { config: String },
}

fn load<T: for<'de> serde::Deserialize<'de>>(path: &str) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))?;
    config::parse(&text).map_err(|e| format!("{path}: {e}"))
}

fn writer(dir: &str, plot_data: bool) -> Result<report::ReportWriter, String> {
    report::ReportWriter::new(dir, plot_data)
        .map_err(|e| format!("cannot create output directory {dir}: {e}"))
}

fn dispatch(cli: &Cli) -> Result<i32, String> {
    let core = |e: WedgeError| e.to_string();
    macro_rules! run {
        ($path:expr, $ty:ty, $f:path) => {{
            let cfg: $ty = load($path)?;
            let w = writer(&cfg.output_dir, cli.plot_data)?;
            $f(&cfg, &w).map_err(core)
        }};
    }
    match &cli.command {
        Command::Kernel { config } => run!(config, config::KernelCmd, commands::run_kernel),
        Command::GreenBound { config } => {
            run!(config, config::GreenBoundCmd, commands::run_green_bound)
        }
        Command::LemmaB1B2S { config } => {
            run!(config, config::LemmaB1B2SCmd, commands::run_b1b2s)
        }
        Command::LemmaB1A1S { config } => {
            run!(config, config::LemmaB1A1SCmd, commands::run_b1a1s)
        }
        Command::LemmaA2S { config } => run!(config, config::LemmaA2SCmd, commands::run_a2s),
        Command::LemmaCombined { config } => {
            run!(config, config::LemmaCombinedCmd, commands::run_combined)
        }
        Command::LemmaAt { config } => run!(config, config::LemmaAtCmd, commands::run_lemma_at),
        Command::LpStoch { config } => run!(config, config::LpCmd, commands::run_lp_stoch),
        Command::LpDet { config } => run!(config, config::LpCmd, commands::run_lp_det),
        Command::Sharpness { config } => {
            run!(config, config::SharpnessCmd, commands::run_sharpness)
        }
        Command::Regularity { config } => {
            run!(config, config::RegularityCmd, commands::run_regularity)
        }
        Command::Apriori { config } => run!(config, config::AprioriCmd, commands::run_apriori),
        Command::Sweep { config } => run!(config, config::SweepCmd, commands::run_sweep),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .or_else(|| std::env::var("WEDGE_LAB_WORKERS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = workers {
        if n == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(USAGE_ERROR);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure worker pool: {e}");
            return ExitCode::from(USAGE_ERROR);
        }
    }
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_ERROR)
        }
    }
}
