use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use conecd::{init_threads, run, CliError, ExperimentConfig, Task};

#[derive(Parser)]
#[command(name = "conecd", version, about = "Curvature-dimension experiments on metric measure cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output` or the current directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a space and audit its metric axioms.
    Validate(RunArgs),
    /// Solve quadratic-cost optimal transport between two measures.
    Ot(RunArgs),
    /// Evaluate the entropy form of CD(K, N) along the optimal interpolation.
    CdCheck(RunArgs),
    /// Reproduce the wide-base entropy counterexample.
    Counterexample(RunArgs),
    /// Curvature table of the cone over a product of spheres.
    RicciTable(RunArgs),
    /// Closed-form cone Ricci identities against finite differences.
    HessCheck(RunArgs),
    /// Graph-Laplacian spectral gap and Poincaré ratios.
    Spectral(RunArgs),
}

impl Command {
    fn split(self) -> (Task, RunArgs) {
        match self {
            Command::Validate(a) => (Task::Validate, a),
            Command::Ot(a) => (Task::Ot, a),
            Command::CdCheck(a) => (Task::CdCheck, a),
            Command::Counterexample(a) => (Task::Counterexample, a),
            Command::RicciTable(a) => (Task::RicciTable, a),
            Command::HessCheck(a) => (Task::HessCheck, a),
            Command::Spectral(a) => (Task::Spectral, a),
        }
    }
}

fn main_inner(task: Task, args: RunArgs) -> Result<(), CliError> {
    init_threads()?;
    let cfg = ExperimentConfig::load(&args.config)?;
    let output = run(task, &cfg)?;
    let dir = args.out.or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    let paths = output.write(&dir)?;
    print!("{}", output.report_json());
    for p in paths {
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let (task, args) = Cli::parse().command.split();
    match main_inner(task, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("conecd {task}: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
