use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shiftmg::experiments::{run_experiment, write_outputs, ExperimentConfig, ExperimentKind, ModelSpec};
use shiftmg::Error;

#[derive(Parser)]
#[command(name = "shiftmg", version, about = "Shifted-Laplacian multigrid Helmholtz solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single preconditioned solves.
    Solve(Common),
    /// Standard vs. mixed formulation across λ.
    LambdaSweep(Common),
    /// Acoustic vs. elastic at matched frequencies.
    AcousticVsElastic(Common),
    /// Number of levels and shift variants.
    LevelsStudy(Common),
    /// Small 3D convergence check.
    Check3d(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for synthetic models.
    #[arg(long)]
    seed: Option<u64>,
}

enum Failure {
    Config(String),
    Solver(String),
}

fn load(common: &Common, expected: ExperimentKind) -> Result<ExperimentConfig, Failure> {
    let mut cfg = ExperimentConfig::load(&common.config)
        .map_err(|e| Failure::Config(format!("{}: {e}", common.config.display())))?;
    if cfg.experiment != expected {
        return Err(Failure::Config(format!(
            "config describes a {} experiment, not {}",
            cfg.experiment.name(),
            expected.name()
        )));
    }
    if let (Some(seed), ModelSpec::Layered(spec)) = (common.seed, &mut cfg.model) {
        spec.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (common, kind) = match &cli.command {
        Command::Solve(c) => (c, ExperimentKind::Solve),
        Command::LambdaSweep(c) => (c, ExperimentKind::LambdaSweep),
        Command::AcousticVsElastic(c) => (c, ExperimentKind::AcousticVsElastic),
        Command::LevelsStudy(c) => (c, ExperimentKind::LevelsStudy),
        Command::Check3d(c) => (c, ExperimentKind::Check3d),
    };
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("thread pool: {e}")))?;
    }
    let cfg = load(common, kind)?;
    let base = common.config.parent().unwrap_or(Path::new("."));
    let out = run_experiment(&cfg, base, Some(&common.out)).map_err(|e| match e {
        Error::InvalidConfig(_) | Error::InvalidGrid(_) | Error::InvalidModel(_) => Failure::Config(e.to_string()),
        e => Failure::Solver(e.to_string()),
    })?;
    let path = write_outputs(&cfg, &out, &common.out).map_err(|e| Failure::Solver(e.to_string()))?;
    if let Some(t) = &out.table {
        print!("{t}");
    }
    for r in &out.rows {
        eprintln!("{} omega={:.4} {}: {} iterations{}", r.grid, r.omega, r.variant, r.iters, if r.converged { "" } else { " (not converged)" });
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(2)
        }
    }
}
