//! Runs exact and stochastic policy-gradient experiments on finite-horizon
//! MDPs and writes CSV logs with JSON summaries.

use std::fs::{self, File};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use finmdp_core::bench::{
    compare_schemes, estimate_rate, run_experiment, CompareOptions, ExperimentError,
    ExperimentSpec, Mode, ModelSource, ScheduleOverrides, SchemeKind, DEFAULT_DELTA,
    DEFAULT_EXACT_BUDGET, LOG_FILE, SUMMARY_FILE,
};
use finmdp_core::stochastic::Execution;
use finmdp_core::trainers::TrainLog;

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one policy and write log.csv, summary.json and theta.json
    Run(RunArgs),
    /// Fit the log-log convergence slope of a training log
    Rate(RateArgs),
    /// Count gradient evaluations both exact schemes need per target accuracy
    Compare(CompareArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Model JSON file, `dice:H=<n>` or `bandit2`
    #[arg(long)]
    model: String,
    /// `sim` or `dyn`
    #[arg(long)]
    scheme: String,
    /// `exact` or `stoch`
    #[arg(long, default_value = "exact")]
    mode: String,
    /// Target accuracy
    #[arg(long)]
    eps: f64,
    /// Failure probability for stochastic runs
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Step size for every phase
    #[arg(long)]
    eta: Option<f64>,
    /// Update steps for every phase
    #[arg(long)]
    steps: Option<u64>,
    /// Trajectories per gradient estimate
    #[arg(long)]
    batch: Option<usize>,
    /// Size stochastic runs by the convergence theorems
    #[arg(long)]
    theorem_scale: bool,
    /// Lower bound on the optimal-action probability used for sizing
    #[arg(long)]
    c: Option<f64>,
    /// Stop as soon as the suboptimality reaches eps
    #[arg(long)]
    early_stop: bool,
    /// Maximal update steps (exact) or sampled trajectories (stochastic)
    #[arg(long)]
    budget: Option<f64>,
    /// Size the simultaneous schedule even if the state set varies by epoch
    #[arg(long)]
    allow_non_constant: bool,
    /// Sample batches on one thread
    #[arg(long)]
    sequential: bool,
    /// Keep every n-th log row
    #[arg(long, default_value_t = 1)]
    log_every: u64,
    /// Start from this checkpoint instead of zero parameters
    #[arg(long)]
    init: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RateArgs {
    /// CSV log written by `run`
    #[arg(long)]
    log: PathBuf,
    /// Optimal value V_0*(μ) the log is measured against
    #[arg(long)]
    optimal: f64,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    model: String,
    /// Comma-separated target accuracies
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    /// Simultaneous step size (default 1/(5H²R*))
    #[arg(long)]
    sim_eta: Option<f64>,
    /// Per-cell cap on update steps
    #[arg(long, default_value_t = DEFAULT_EXACT_BUDGET as u64)]
    budget: u64,
    /// Lower bound c_h for the dynamic schedule
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let spec = ExperimentSpec {
        model: args.model.parse::<ModelSource>()?,
        scheme: args.scheme.parse::<SchemeKind>()?,
        mode: args.mode.parse::<Mode>()?,
        epsilon: args.eps,
        delta: args.delta,
        seed: args.seed,
        overrides: ScheduleOverrides {
            eta: args.eta,
            steps: args.steps,
            batch: args.batch,
            theorem_scale: args.theorem_scale,
            c: args.c,
            early_stop: args.early_stop,
            budget: args.budget,
            allow_non_constant: args.allow_non_constant,
        },
        exec: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        log_every: args.log_every,
        init: args.init,
        out_dir: Some(args.out.clone()),
    };
    let result = run_experiment(&spec)?;
    let s = &result.summary;
    println!(
        "{} {:?}/{:?}: final_subopt={:.6e} max_state_subopt={:.6e} grad_evals={}",
        s.model, s.scheme, s.mode, s.final_subopt, s.max_state_subopt, s.grad_evals_total
    );
    println!("wrote {}", args.out.join(LOG_FILE).display());
    println!("wrote {}", args.out.join(SUMMARY_FILE).display());
    Ok(())
}

fn rate(args: RateArgs) -> anyhow::Result<()> {
    let file = File::open(&args.log)
        .map_err(|e| ExperimentError::Spec(format!("cannot open {}: {e}", args.log.display())))?;
    let log = TrainLog::read_csv(file)
        .map_err(|e| ExperimentError::Spec(format!("{}: {e}", args.log.display())))?;
    let est = estimate_rate(&log, args.optimal).map_err(|e| ExperimentError::Spec(e.to_string()))?;
    let json = serde_json::json!({
        "slope": est.slope,
        "intercept": est.intercept,
        "r_squared": est.r_squared,
        "window": [est.window.0, est.window.1],
        "points": est.points,
        "final_subopt": est.final_subopt,
    });
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

fn compare(args: CompareArgs) -> anyhow::Result<()> {
    let mdp = args.model.parse::<ModelSource>()?.load()?;
    let opts = CompareOptions {
        sim_eta: args.sim_eta,
        budget: args.budget,
        c: args.c,
    };
    let rows = compare_schemes(&mdp, &args.eps, &opts)?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join("compare.json");
    fs::write(&path, serde_json::to_string_pretty(&rows)? + "\n")
        .with_context(|| format!("writing {}", path.display()))?;
    let cell = |e: Option<u64>| e.map_or_else(|| "-".to_owned(), |n| n.to_string());
    println!("{:>10} {:>16} {:>20}", "eps", "evals_dynamic", "evals_simultaneous");
    for r in &rows {
        println!(
            "{:>10} {:>16} {:>20}",
            r.epsilon,
            cell(r.evals_dynamic),
            cell(r.evals_simultaneous)
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => run(a),
        Command::Rate(a) => rate(a),
        Command::Compare(a) => compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = e.downcast_ref::<ExperimentError>().map_or(1, |e| e.exit_code());
            ExitCode::from(code as u8)
        }
    }
}
