//! `macro-ale solve`: runs a scenario and writes VTK fields, interface
//! surfaces and the solver log.
//!
//! The worker count comes from `MACRO_ALE_THREADS` (default 1).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::error;

use macro_ale::driver::{parse_config, run_simulation, Preset, ScenarioConfig};
use macro_ale::solvers::Method;

const THREADS_VAR: &str = "MACRO_ALE_THREADS";

#[derive(Parser)]
#[command(name = "macro-ale", version, about = "Fixed-mesh ALE solver for moving interfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario.
    Solve(SolveArgs),
}

#[derive(Parser)]
struct SolveArgs {
    /// Scenario file (TOML).
    #[arg(long, required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    solver: Option<SolverArg>,
    /// Macro mesh resolution (cells per axis).
    #[arg(long)]
    n: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base parameters for fields the config file leaves out.
    #[arg(long, value_enum)]
    preset: Option<PresetArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverArg {
    Cg,
    Gmres,
    Segregated,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Paper1,
    Paper2,
}

fn worker_count() -> Result<usize, String> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(1),
        Err(e) => Err(format!("{THREADS_VAR}: {e}")),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(format!("{THREADS_VAR} must be a positive integer, got '{s}'")),
        },
    }
}

fn load_config(args: &SolveArgs) -> Result<ScenarioConfig, String> {
    let preset = args.preset.map(|p| match p {
        PresetArg::Paper1 => Preset::Paper1,
        PresetArg::Paper2 => Preset::Paper2,
    });
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| format!("{}: {e}", path.display()))?,
        None => String::new(),
    };
    let mut cfg = parse_config(&text, preset).map_err(|e| e.to_string())?;
    if let Some(s) = args.solver {
        cfg.solver.method = match s {
            SolverArg::Cg => Method::Cg,
            SolverArg::Gmres => Method::Gmres,
            SolverArg::Segregated => Method::SchurCg,
        };
    }
    if let Some(n) = args.n {
        cfg.n = n;
    }
    if let Some(tol) = args.tol {
        cfg.solver.tol = tol;
    }
    if let Some(out) = &args.out {
        cfg.output.dir = Some(out.clone());
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let Command::Solve(args) = cli.command;

    let cfg = match worker_count().and_then(|threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| e.to_string())?;
        load_config(&args)
    }) {
        Ok(cfg) => cfg,
        Err(msg) => {
            error!("{msg}");
            return ExitCode::from(2);
        }
    };

    match run_simulation(&cfg) {
        Ok(summary) => {
            log::info!("finished at t = {}", summary.end_time);
            ExitCode::SUCCESS
        }
        Err(e) => {
            error!("{e}");
            ExitCode::FAILURE
        }
    }
}
