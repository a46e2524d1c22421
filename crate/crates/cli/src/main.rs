use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ipzo_cli::{run, ExperimentSpec, RawSpec};

/// Run zeroth-order proximal solvers on LASSO and sparse classification
/// problems and write per-iteration CSV traces.
#[derive(Parser, Debug)]
#[command(name = "ipzo", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an experiment.
    Run(SpecArgs),
    /// Check a spec without running it.
    Validate(SpecArgs),
}

#[derive(Args, Debug)]
struct SpecArgs {
    /// Experiment spec (`key = value` lines).
    #[arg(long, value_name = "PATH")]
    spec: Option<PathBuf>,

    /// Output directory [default: $IPZO_OUT_DIR, else ./ipzo-out]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Solver to run; repeat for several (ipzopm, zopg).
    #[arg(long = "solver", value_name = "NAME")]
    solvers: Vec<String>,

    #[arg(long)]
    seed: Option<u64>,

    /// Number of runs per solver; run r uses seed + r.
    #[arg(long)]
    repeat: Option<usize>,

    /// Parallel runs (0 = one per core).
    #[arg(long)]
    jobs: Option<usize>,

    /// Leave wall_ms empty so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,

    /// Override any spec key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl SpecArgs {
    fn load(&self) -> anyhow::Result<ExperimentSpec> {
        let mut raw = match &self.spec {
            Some(path) => RawSpec::read(path)?,
            None => RawSpec::default(),
        };
        for pair in &self.overrides {
            raw.set_pair(pair)?;
        }
        if let Some(out) = &self.out {
            raw.set("out", out.display().to_string());
        }
        if !self.solvers.is_empty() {
            raw.set("solvers", self.solvers.join(","));
        }
        if let Some(seed) = self.seed {
            raw.set("seed", seed.to_string());
        }
        if let Some(repeat) = self.repeat {
            raw.set("repeat", repeat.to_string());
        }
        if let Some(jobs) = self.jobs {
            raw.set("jobs", jobs.to_string());
        }
        if self.no_timing {
            raw.set("no_timing", "true");
        }
        Ok(ExperimentSpec::from_raw(&raw)?)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Validate(args) => {
            args.load()?;
            println!("ok");
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(args) => {
            let spec = args.load()?;
            let summary = run(&spec).context("experiment failed")?;
            for o in &summary.outcomes {
                eprintln!(
                    "{} r{}: {} after {} iterations, h = {}{}",
                    o.solver,
                    o.repeat,
                    o.termination,
                    o.iterations,
                    o.final_h,
                    if o.message.is_empty() { String::new() } else { format!(" ({})", o.message) }
                );
            }
            eprintln!("summary: {}", summary.summary_path.display());
            Ok(if summary.all_failed() { ExitCode::FAILURE } else { ExitCode::SUCCESS })
        }
    }
}
