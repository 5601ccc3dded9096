mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use pinching_noma::experiments::{
    aggregate, compare_schemes, convergence_trace, early_gain_fraction, sweep_epsilon, sweep_users,
    RunConfig, RunOptions, Scheme, SweepRecord,
};

/// Robust max-min SINR design for NOMA pinching-antenna downlinks.
#[derive(Debug, Parser)]
#[command(name = "pinching-noma", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run all four schemes on independent realizations at the configured point
    /// (one realization unless --realizations is given).
    Optimize(RunArgs),
    /// Sweep the CSI error bound over `eps_grid`.
    SweepEps(RunArgs),
    /// Sweep the number of users over `k_grid`.
    SweepUsers(RunArgs),
    /// Record per-iteration global-best traces of both swarm schemes.
    Converge(RunArgs),
    /// Load and check a config file without running anything.
    ValidateConfig(ConfigArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// JSON config file.
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Set a config key after loading, e.g. `csi_eps=0.2` or `pso.max_iters=50`. Repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// CSV output path; the effective config is written next to it as `<stem>.config.json`.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of realizations; overrides the config's `realizations`.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    realizations: Option<u64>,
    /// Worker threads (0 = one per core). Results do not depend on this.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Record wall time in the `runtime_ms` column instead of 0.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Run(#[from] pinching_noma::Error),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Config(_) => 2,
            CliError::Run(e) if e.is_config() => 2,
            CliError::Run(_) | CliError::Io(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ValidateConfig(args) => {
            let cfg = config::load(&args.config, &args.overrides)?;
            let s = &cfg.system;
            println!("status=ok");
            println!(
                "num_users={} num_pas={} csi_eps={} realizations={}",
                s.num_users, s.num_pas, s.csi_eps, cfg.realizations
            );
            Ok(())
        }
        Command::Optimize(args) => execute(args, Task::Optimize),
        Command::SweepEps(args) => execute(args, Task::SweepEps),
        Command::SweepUsers(args) => execute(args, Task::SweepUsers),
        Command::Converge(args) => execute(args, Task::Converge),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Task {
    Optimize,
    SweepEps,
    SweepUsers,
    Converge,
}

impl Task {
    fn name(self) -> &'static str {
        match self {
            Task::Optimize => "optimize",
            Task::SweepEps => "sweep-eps",
            Task::SweepUsers => "sweep-users",
            Task::Converge => "converge",
        }
    }
}

fn execute(args: RunArgs, task: Task) -> Result<(), CliError> {
    let mut cfg = config::load(&args.config.config, &args.config.overrides)?;
    match args.realizations {
        Some(r) => cfg.realizations = r as usize,
        None if task == Task::Optimize => cfg.realizations = 1,
        None => {}
    }
    let opts = cfg.options(args.seed, args.timing);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;

    eprintln!(
        "{}: {} realization(s), seed {}, {} thread(s)",
        task.name(),
        opts.realizations,
        opts.master_seed,
        pool.current_num_threads()
    );
    let start = Instant::now();
    let records = pool.install(|| produce(task, &cfg, &opts))?;
    eprintln!(
        "{}: finished in {:.1} s",
        task.name(),
        start.elapsed().as_secs_f64()
    );

    if let Some(out) = &args.out {
        let sidecar = output::write_results(out, &records, &cfg)?;
        eprintln!(
            "wrote {} ({} rows) and {}",
            out.display(),
            records.len(),
            sidecar.display()
        );
    }
    summarize(task, &records);
    Ok(())
}

fn produce(task: Task, cfg: &RunConfig, opts: &RunOptions) -> Result<Vec<SweepRecord>, CliError> {
    let records = match task {
        Task::Optimize => {
            let runs = compare_schemes(&cfg.system, &cfg.pso, opts)?;
            let single = runs.len() == 1;
            let mut records = Vec::new();
            for (r, (seed, schemes)) in runs.iter().enumerate() {
                for run in schemes {
                    if single {
                        println!(
                            "scheme={} positions={} alpha={}",
                            run.scheme,
                            join(&run.layout.positions),
                            join(&run.power.fractions)
                        );
                    }
                    records.push(run.record("realization", r as f64, *seed, opts.timing));
                }
            }
            records
        }
        Task::SweepEps => sweep_epsilon(&cfg.system, &cfg.pso, &cfg.eps_grid, opts)?,
        Task::SweepUsers => sweep_users(&cfg.system, &cfg.pso, &cfg.k_grid, opts)?,
        Task::Converge => {
            let trace = convergence_trace(&cfg.system, &cfg.pso, opts)?;
            for scheme in [Scheme::RobustPso, Scheme::NonRobustPso] {
                let curve = trace.mean_db(scheme);
                let fraction =
                    early_gain_fraction(&curve).map_or("nan".to_string(), |f| format!("{f:.4}"));
                println!(
                    "scheme={scheme} iterations={} initial_db={:.4} final_db={:.4} first_half_gain_fraction={fraction}",
                    curve.len() - 1,
                    curve[0],
                    curve[curve.len() - 1],
                );
            }
            return Ok(trace.records());
        }
    };
    Ok(records)
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| pinching_noma::experiments::format_sig9(*v))
        .collect::<Vec<_>>()
        .join(";")
}

fn summarize(task: Task, records: &[SweepRecord]) {
    if task == Task::Converge {
        return;
    }
    if task == Task::Optimize {
        for scheme in Scheme::ALL {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.scheme == scheme)
                .map(|r| r.min_sinr_db)
                .collect();
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            println!(
                "scheme={scheme} mean_min_sinr_db={mean:.4} realizations={}",
                values.len()
            );
        }
        return;
    }
    for a in aggregate(records) {
        println!(
            "sweep_var={} sweep_value={} scheme={} mean_min_sinr_db={:.4} realizations={}",
            a.sweep_var, a.sweep_value, a.scheme, a.mean_db, a.count
        );
    }
}
