use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use so3_cubics_harness::{run, ExperimentConfig, HarnessError, Kind, Overrides, RawConfig};

/// Riemannian cubics in SO(3): figures, comparisons and convergence studies.
#[derive(Parser)]
#[command(name = "so3cubic", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lie quadratic and its approximants on [0, 5].
    Figure1(Common),
    /// Lie quadratic and its approximants on [0, 25].
    Figure2(Common),
    /// Nearly geodesic cubic against its first-order approximant.
    Figure3(Common),
    /// Convergence-order study over a decreasing list of deltas.
    Converge(Common),
    /// Compare a Lie quadratic with V1hat, V2hat and the Taylor baseline.
    Quadratic(Common),
    /// Compare an integrated cubic with its quadrature reconstruction and xhat.
    Cubic(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Integration step.
    #[arg(long)]
    step: Option<f64>,
    /// Perturbation scale.
    #[arg(long)]
    delta: Option<f64>,
}

fn execute(kind: Kind, args: Common) -> Result<(), HarnessError> {
    let raw = match &args.config {
        Some(path) => RawConfig::from_path(path)?,
        None => RawConfig::default(),
    };
    let mut cfg = ExperimentConfig::resolve(raw, Some(kind))?;
    Overrides {
        out: args.out,
        step: args.step,
        delta: args.delta,
    }
    .apply(&mut cfg)?;
    let result = run(&cfg)?;
    for f in &result.files {
        println!("{}", f.display());
    }
    if kind == Kind::Converge && result.report["all_pass"] == false {
        eprintln!("warning: some convergence ratios fall outside their bands");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Figure1(a) => (Kind::Figure1, a),
        Command::Figure2(a) => (Kind::Figure2, a),
        Command::Figure3(a) => (Kind::Figure3, a),
        Command::Converge(a) => (Kind::Converge, a),
        Command::Quadratic(a) => (Kind::QuadraticCompare, a),
        Command::Cubic(a) => (Kind::CubicCompare, a),
    };
    match execute(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
