//! Command-line driver: runs plans, sweeps and the diagnostic suite.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use maee_core::experiment::{load_config, run_plan, validate, write_outputs, ExperimentPlan, RunOptions, ScenarioFile};
use maee_core::Error;

#[derive(Parser)]
#[command(name = "maee", version, about = "Energy-efficient movable-antenna downlink design")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scheme and seed of a plan at its base scenario.
    Run(RunArgs),
    /// Run the plan's sweep axis.
    Sweep(RunArgs),
    /// Run the oracle checks on one seeded scenario.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    plan: PathBuf,
    /// Replace the plan's seed list with a single seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    mc_samples: Option<usize>,
    /// CSV path; the JSON sidecar goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Record measured wall time in the CSV (makes it non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Plan whose scenario is checked; the reference point otherwise.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    mc_samples: usize,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

fn is_config_error(e: &Error) -> bool {
    matches!(e, Error::Config { .. } | Error::Parse(_) | Error::Io(_))
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if is_config_error(e) { 2 } else { 1 })
}

fn run(args: RunArgs, sweep: bool) -> ExitCode {
    let plan = match load_config(&args.plan) {
        Ok(p) => p,
        Err(e) => return exit_for(&e),
    };
    if sweep && plan.file.sweep.axis.is_none() {
        eprintln!("error: plan has no sweep axis");
        return ExitCode::from(2);
    }
    let mut file = plan.file.clone();
    if let Some(seed) = args.seed {
        file.sweep.seeds = vec![seed];
    }
    if let Some(n) = args.mc_samples {
        file.sweep.mc_samples = n;
    }
    let plan = match ExperimentPlan::from_file(file) {
        Ok(p) if sweep => p,
        Ok(p) => p.without_axis(),
        Err(e) => return exit_for(&e),
    };
    let out = args.out.or_else(|| plan.file.sweep.output.clone()).unwrap_or_else(|| PathBuf::from("results.csv"));
    let result = run_plan(&plan, RunOptions { jobs: args.jobs, timing: args.timing }).and_then(|o| write_outputs(&plan, &o, &out).map(|p| (o, p)));
    match result {
        Ok((output, sidecar)) => {
            let failed = output.rows.iter().filter(|r| r.status != "ok").count();
            println!("wrote {} rows to {} ({} failed), sidecar {}", output.rows.len(), out.display(), failed, sidecar.display());
            ExitCode::SUCCESS
        }
        Err(e) => exit_for(&e),
    }
}

fn run_validate(args: ValidateArgs) -> ExitCode {
    let config = match &args.config {
        Some(path) => load_config(path).map(|p| p.base),
        None => ScenarioFile::reference().to_config(Default::default()),
    };
    let config = match config {
        Ok(c) => c,
        Err(e) => return exit_for(&e),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match pool.install(|| validate(&config, args.seed, args.mc_samples)) {
        Ok(report) => {
            for c in &report.checks {
                println!("{} {}: {:.3e} (limit {:.1e})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.value, c.tolerance);
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => exit_for(&e),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run(a) => run(a, false),
        Command::Sweep(a) => run(a, true),
        Command::Validate(a) => run_validate(a),
    }
}
