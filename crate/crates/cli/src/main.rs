use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gs_operators_cli::{run, CliError, Command, ExperimentConfig, EXIT_VIOLATION};

/// Environment variable overriding the output directory.
const OUT_DIR_ENV: &str = "GS_OUT_DIR";

#[derive(Parser)]
#[command(name = "gs-operators", version, about = "Sweeps, moment checks and bound verification for summation-integral operators")]
struct Cli {
    #[command(subcommand)]
    command: Sub,

    /// TOML experiment configuration; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides GS_OUT_DIR and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads (0 = all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Multiply the quadrature tolerance and the truncation threshold.
    #[arg(long, global = true)]
    tolerance_scale: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Sub {
    /// Base and Bezier operator values for every grid cell.
    Eval,
    /// Closed-form moments against quadrature.
    Moments,
    /// Operator errors against the convergence bounds.
    Verify,
    /// Empirical convergence orders.
    Order,
    /// List the built-in test functions.
    Catalogue,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(w) = cli.workers {
        cfg.output.workers = w;
    }
    if let Some(s) = cli.tolerance_scale {
        cfg.scale_tolerances(s)?;
    }
    let out_dir = cli
        .out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| cfg.output.dir.clone());
    let cmd = match cli.command {
        Sub::Eval => Command::Eval,
        Sub::Moments => Command::Moments,
        Sub::Verify => Command::Verify,
        Sub::Order => Command::Order,
        Sub::Catalogue => Command::Catalogue,
    };
    let outcome = run(cmd, &cfg, &out_dir)?;
    if !outcome.summary.is_empty() {
        println!("{}", outcome.summary);
    }
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(if outcome.violations > 0 { EXIT_VIOLATION } else { 0 })
}
