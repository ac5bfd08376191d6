use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use qwalk_topo::config::ExperimentConfig;
use qwalk_topo::experiments::{describe, exit_code, run_with_workers, selftest};
use qwalk_topo::WalkError;

#[derive(Parser)]
#[command(name = "qwalk-topo", version, about = "Topological phases of discrete-time quantum walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a 1D walk and record distributions and the window probability
    Walk1d(Common),
    /// Winding-number phase diagram of the split-step walk
    Phase1d(Common),
    /// Chern-number phase diagram of a 2D walk
    Phase2d(Common),
    /// Strip spectrum with edge tags
    Edge2d(Common),
    /// Reflecting-edge bound state, analytic and numerical
    Boundstate(Common),
    /// Long-time distribution of x/N
    Asymptotic(Common),
    /// Full quasi-energy spectrum of a finite lattice
    Spectrum(Common),
}

#[derive(Args)]
struct Common {
    /// JSON experiment config
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sweeps
    #[arg(long)]
    workers: Option<usize>,
    /// Run the invariant checks for this command instead of an experiment
    #[arg(long)]
    selftest: bool,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Walk1d(c) => ("walk1d", c),
            Command::Phase1d(c) => ("phase1d", c),
            Command::Phase2d(c) => ("phase2d", c),
            Command::Edge2d(c) => ("edge2d", c),
            Command::Boundstate(c) => ("boundstate", c),
            Command::Asymptotic(c) => ("asymptotic", c),
            Command::Spectrum(c) => ("spectrum", c),
        }
    }
}

fn run_selftest(name: &str) -> Result<(), WalkError> {
    let start = Instant::now();
    let checks = selftest(name)?;
    let mut failed = 0;
    for c in &checks {
        println!("{} {} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.passed);
    }
    println!("{name} selftest: {} checks, {failed} failed, {:.2?}", checks.len(), start.elapsed());
    if failed > 0 {
        return Err(WalkError::ToleranceBreach(format!("{failed} selftest checks failed")));
    }
    Ok(())
}

fn run_command(name: &str, opts: &Common) -> Result<(), WalkError> {
    if opts.selftest {
        return run_selftest(name);
    }
    let path = opts.config.as_ref().ok_or_else(|| WalkError::InvalidConfig("--config is required".into()))?;
    let cfg = ExperimentConfig::load(path)?;
    if cfg.experiment.name() != name {
        return Err(WalkError::InvalidConfig(format!(
            "{} holds a {} experiment, not {name}",
            path.display(),
            cfg.experiment.name()
        )));
    }
    let report = run_with_workers(&cfg, opts.workers)?;
    report.write_to(&opts.out)?;
    print!("{}", describe(&report));
    println!("results in {}", opts.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, opts) = cli.command.parts();
    match run_command(name, opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
