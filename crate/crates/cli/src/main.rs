//! `wavedim`: config-driven runs of the damped wave dimension pipeline.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use run::{CliError, Setup};

/// Default output directory when neither `--out` nor `output_dir` is set.
const OUT_ENV: &str = "WAVEDIM_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "wavedim",
    version,
    about = "Damped wave semiflows and attractor dimension bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate one trajectory; writes trajectory.csv and final_state.bin.
    Simulate(Common),
    /// Burn in and sample the attractor; writes attractor.csv.
    Attractor(Common),
    /// Track d-volumes along a trajectory; writes volume.csv.
    Tangent(Common),
    /// Weighted eigenvalues, counting and CLR audit; writes spectral.csv and counting.csv.
    Spectral(Common),
    /// Analytic dimension bound; writes bound.csv.
    Bound(Common),
    /// Attractor, C~, bound and Ky Fan cross-check in one run.
    Pipeline(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config and $WAVEDIM_OUT).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for parallel sweeps.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let (name, common) = match &cli.command {
        Command::Simulate(c) => ("simulate", c),
        Command::Attractor(c) => ("attractor", c),
        Command::Tangent(c) => ("tangent", c),
        Command::Spectral(c) => ("spectral", c),
        Command::Bound(c) => ("bound", c),
        Command::Pipeline(c) => ("pipeline", c),
    };
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--threads: {e}")))?;
    }
    let mut cfg = RunConfig::load(&common.config).map_err(CliError::Config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let out = common
        .out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("wavedim-out"));
    std::fs::create_dir_all(&out).map_err(|e| CliError::Lib(e.into()))?;
    let setup = Setup::build(cfg, out)?;
    let result = match name {
        "simulate" => run::simulate(&setup),
        "attractor" => run::attractor(&setup),
        "tangent" => run::tangent(&setup),
        "spectral" => run::spectral(&setup),
        "bound" => run::bound(&setup),
        _ => run::pipeline(&setup),
    };
    let report = result?;
    run::write_report(&setup, &report)?;
    print!("{}", report.as_str());
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wavedim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
