//! `cmpat`: command-line front end for the diffusive Crowley-Martin analyses.

mod commands;
mod config;
mod error;
mod report;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Instant, SystemTime};

use clap::{Parser, Subcommand};

use config::RunConfig;
use error::{CliError, ErrorReport, EXIT_OK};
use report::Output;

#[derive(Parser)]
#[command(
    name = "cmpat",
    version,
    about = "Diffusive Crowley-Martin predator-prey analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (see the README for the grammar).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory receiving reports, tables and plots.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the `seed` key of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps and multistart.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Regime tag, zeros of G, critical points and a sampled C(u) curve.
    Regimes,
    /// Constant equilibria and the predicted count.
    Equilibria,
    /// Dispersion table and linear stability of each equilibrium.
    Dispersion,
    /// Time integration from the configured initial state.
    Simulate,
    /// Newton multistart for steady states.
    Steady,
    /// Fixed-point indices and their sum.
    Index,
    /// Diffusion level above which no nonconstant steady state exists.
    Threshold,
    /// Grid of runs over two parameter axes.
    Sweep,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Regimes => "regimes",
            Command::Equilibria => "equilibria",
            Command::Dispersion => "dispersion",
            Command::Simulate => "simulate",
            Command::Steady => "steady",
            Command::Index => "index",
            Command::Threshold => "threshold",
            Command::Sweep => "sweep",
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config is required".into()))?;
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let started = SystemTime::now();
    let clock = Instant::now();
    let mut out = Output::new(&cli.out_dir)?;
    let invariants = match cli.command {
        Command::Regimes => commands::regimes(&cfg, &mut out),
        Command::Equilibria => commands::equilibria(&cfg, &mut out),
        Command::Dispersion => commands::dispersion_cmd(&cfg, &mut out),
        Command::Simulate => commands::simulate(&cfg, &mut out),
        Command::Steady => commands::steady(&cfg, &mut out),
        Command::Index => commands::index(&cfg, &mut out),
        Command::Threshold => commands::threshold(&cfg, &mut out),
        Command::Sweep => commands::sweep(&cfg, &mut out),
    }?;
    let files = out.finish(cli.command.name(), started, clock.elapsed())?;
    for f in &files {
        println!("{}", cli.out_dir.join(f).display());
    }
    let failed: Vec<String> = invariants
        .iter()
        .filter(|i| !i.ok)
        .map(|i| format!("{}: {}", i.name, i.detail))
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(failed))
    }
}

fn report_error(cli: Option<&Cli>, e: &CliError) -> ExitCode {
    let report = ErrorReport::from(e);
    let text = serde_json::to_string_pretty(&report).unwrap_or_else(|_| e.to_string());
    eprintln!("{text}");
    if let Some(cli) = cli {
        if std::fs::create_dir_all(&cli.out_dir).is_ok() {
            let _ = std::fs::write(cli.out_dir.join("error.json"), format!("{text}\n"));
        }
    }
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            let _ = e.print();
            return ExitCode::from(EXIT_OK as u8);
        }
        Err(e) => {
            let _ = e.print();
            return report_error(None, &CliError::Usage(e.kind().to_string()));
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => report_error(Some(&cli), &e),
    }
}
