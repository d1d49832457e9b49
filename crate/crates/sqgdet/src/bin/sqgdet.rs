//! Command-line front end: each subcommand reads a JSON run configuration,
//! executes it, and writes series plus a run record under the output
//! directory. Exit codes: 0 success, 2 rejected configuration, 3 numerical
//! failure (blow-up, undefined wavenumber, degenerate fit), 4 I/O failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sqgdet::harness::{
    assign_output_dirs, configure_global_threads, parse_config, parse_sweep, run, run_sweep,
    Experiment, RunConfig, RunRecord, SweepMember,
};
use sqgdet::SqgError;

#[derive(Parser)]
#[command(
    name = "sqgdet",
    version,
    about = "Dissipative SQG simulator and determining-wavenumber toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the solver RNG seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the equation and record the diagnostic series.
    Simulate(RunArgs),
    /// Simulate, then scan the determining wavenumber along the trajectory.
    Determine(RunArgs),
    /// Run a master/slave pair with low-mode slaving and fit the Besov decay.
    Sync(RunArgs),
    /// Build the truncation-energy ladder and audit the iteration inequality.
    Degiorgi(RunArgs),
    /// Run a list of configs in parallel with per-member failure isolation.
    Sweep {
        /// Path to a JSON array of run configurations.
        #[arg(long)]
        config: PathBuf,
        /// Root directory for member outputs and sweep_records.json
        /// (default: the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sweep worker threads (capped by SQGDET_THREADS).
        #[arg(long, default_value_t = 2)]
        workers: usize,
        /// Base RNG seed override; member i runs with seed + i.
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_global_threads();
    match dispatch() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch() -> Result<ExitCode, SqgError> {
    match Cli::parse().command {
        Command::Simulate(args) => run_one(Experiment::Simulate, args),
        Command::Determine(args) => run_one(Experiment::Determine, args),
        Command::Sync(args) => run_one(Experiment::Sync, args),
        Command::Degiorgi(args) => run_one(Experiment::Degiorgi, args),
        Command::Sweep {
            config,
            out,
            workers,
            seed,
        } => run_sweep_command(config, out, workers, seed),
    }
}

fn load_config(path: &PathBuf) -> Result<RunConfig, SqgError> {
    let text = fs::read_to_string(path)?;
    parse_config(&text)
}

fn run_one(expected: Experiment, args: RunArgs) -> Result<ExitCode, SqgError> {
    let mut cfg = load_config(&args.config)?;
    if cfg.experiment != expected {
        return Err(SqgError::Validation(format!(
            "experiment: config says \"{}\" but the `{}` subcommand was invoked",
            cfg.experiment.name(),
            expected.name()
        )));
    }
    if let Some(out) = args.out {
        cfg.output_dir = Some(out);
    }
    if let Some(seed) = args.seed {
        cfg.solver.seed = seed;
    }
    let record = run(&cfg)?;
    print_record(&record);
    Ok(ExitCode::SUCCESS)
}

fn print_record(record: &RunRecord) {
    println!(
        "{}: done in {:.2} s (config {})",
        record.experiment,
        record.wall_time_seconds,
        &record.config_hash[..12.min(record.config_hash.len())]
    );
    println!("  output: {}", record.output_dir);
    for path in &record.series_paths {
        println!("  series: {path}");
    }
    println!(
        "  summary: {}",
        serde_json::to_string(&record.summary).unwrap_or_else(|_| "{}".into())
    );
}

fn run_sweep_command(
    config: PathBuf,
    out: Option<PathBuf>,
    workers: usize,
    seed: Option<u64>,
) -> Result<ExitCode, SqgError> {
    let text = fs::read_to_string(&config)?;
    let mut cfgs = parse_sweep(&text)?;
    if let Some(base) = seed {
        for (i, cfg) in cfgs.iter_mut().enumerate() {
            cfg.solver.seed = base.wrapping_add(i as u64);
        }
    }
    let root = out.unwrap_or_else(|| PathBuf::from("."));
    assign_output_dirs(&mut cfgs, Some(&root))?;
    let members = run_sweep(&cfgs, workers, &root)?;

    let mut worst: u8 = 0;
    for member in &members {
        print_member(member);
        if let Some(err) = &member.error {
            worst = worst.max(err.exit_code as u8);
        }
    }
    println!(
        "sweep: {} of {} members done; records in {}",
        members.iter().filter(|m| m.status == "done").count(),
        members.len(),
        root.join("sweep_records.json").display()
    );
    Ok(ExitCode::from(worst))
}

fn print_member(member: &SweepMember) {
    match (&member.record, &member.error) {
        (Some(record), _) => println!(
            "member {:03} {} done in {:.2} s",
            member.index, member.experiment, record.wall_time_seconds
        ),
        (None, Some(err)) => println!(
            "member {:03} {} failed ({}): {}",
            member.index, member.experiment, err.kind, err.message
        ),
        (None, None) => println!("member {:03} {}: no outcome", member.index, member.experiment),
    }
}
