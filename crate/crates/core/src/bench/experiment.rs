use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::models::{build_bandit2, build_dice};
use crate::mdp::{backward_induction_optimal, evaluate_policy, FiniteMdp, ModelFileError};
use crate::softmax::{policy_of, CheckpointError, ParamTensor};
use crate::stochastic::{
    theorem_dynamic, theorem_simultaneous, BudgetError, Execution, StochasticOptions,
    StochasticSchedule,
};
use crate::trainers::{
    schedule_dynamic, schedule_simultaneous, simultaneous_step_size, train_dynamic,
    train_simultaneous, uniform_mu_list, CConstant, DynamicSchedule, LogError, ScheduleError,
    TrainError, TrainLog, TrainOptions, TrainOutput,
};

/// Step cap for exact runs when no budget is given.
pub const DEFAULT_EXACT_BUDGET: f64 = 1e7;
/// Trajectory cap for stochastic runs when no budget is given.
pub const DEFAULT_STOCHASTIC_BUDGET: f64 = 1e9;
pub const DEFAULT_DELTA: f64 = 0.1;

pub const LOG_FILE: &str = "log.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const THETA_FILE: &str = "theta.json";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Model(#[from] ModelFileError),
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error("budget of {budget} steps spent; suboptimality {subopt:.6e} is still above {epsilon}")]
    NotReached {
        budget: u64,
        subopt: f64,
        epsilon: f64,
    },
    #[error("cannot write outputs: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Log(#[from] LogError),
    #[error("summary JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl ExperimentError {
    /// 2 for invalid input, 3 for an exhausted budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Model(_) | Self::Spec(_) | Self::Schedule(_) | Self::Checkpoint(_) => 2,
            Self::Budget(_) | Self::NotReached { .. } => 3,
            _ => 1,
        }
    }
}

/// A model file or a built-in generator such as `dice:H=5` or `bandit2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Dice { horizon: usize },
    Bandit2,
    File(PathBuf),
}

impl ModelSource {
    pub fn load(&self) -> Result<FiniteMdp, ExperimentError> {
        Ok(match self {
            Self::Dice { horizon } => build_dice(*horizon),
            Self::Bandit2 => build_bandit2(),
            Self::File(path) => FiniteMdp::from_json_file(path)?,
        })
    }
}

impl FromStr for ModelSource {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "bandit2" {
            return Ok(Self::Bandit2);
        }
        if s == "dice" {
            return Ok(Self::Dice { horizon: 5 });
        }
        if let Some(rest) = s.strip_prefix("dice:") {
            let value = rest
                .strip_prefix("H=")
                .or_else(|| rest.strip_prefix("h="))
                .unwrap_or(rest);
            return match value.parse::<usize>() {
                Ok(h) if h >= 1 => Ok(Self::Dice { horizon: h }),
                _ => Err(ExperimentError::Spec(format!(
                    "dice horizon must be a positive integer, got {rest:?}"
                ))),
            };
        }
        Ok(Self::File(PathBuf::from(s)))
    }
}

impl fmt::Display for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Dice { horizon } => write!(f, "dice:H={horizon}"),
            Self::Bandit2 => f.write_str("bandit2"),
            Self::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Simultaneous,
    Dynamic,
}

impl FromStr for SchemeKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sim" | "simultaneous" => Ok(Self::Simultaneous),
            "dyn" | "dynamic" => Ok(Self::Dynamic),
            _ => Err(ExperimentError::Spec(format!("unknown scheme {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Stochastic,
}

impl FromStr for Mode {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(Self::Exact),
            "stoch" | "stochastic" => Ok(Self::Stochastic),
            _ => Err(ExperimentError::Spec(format!("unknown mode {s:?}"))),
        }
    }
}

/// Replacements for the theorem-derived schedule.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ScheduleOverrides {
    /// Step size for every phase.
    pub eta: Option<f64>,
    /// Step count for every phase.
    pub steps: Option<u64>,
    pub batch: Option<usize>,
    /// Size stochastic runs by the convergence theorems instead of
    /// `steps` and `batch`.
    pub theorem_scale: bool,
    /// Lower bound on the optimal-action probability used for sizing; the
    /// default is `1/|𝒜|`.
    pub c: Option<f64>,
    /// Stop once the suboptimality reaches `ε`.
    pub early_stop: bool,
    /// Maximal update steps (exact) or sampled trajectories (stochastic).
    pub budget: Option<f64>,
    /// Evaluate the simultaneous step count on models whose state set
    /// changes across epochs.
    pub allow_non_constant: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub model: ModelSource,
    pub scheme: SchemeKind,
    pub mode: Mode,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub overrides: ScheduleOverrides,
    pub exec: Execution,
    pub log_every: u64,
    /// Checkpoint to start from instead of `θ = 0`.
    pub init: Option<PathBuf>,
    /// Directory receiving `log.csv`, `summary.json` and `theta.json`.
    pub out_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(model: ModelSource, scheme: SchemeKind, mode: Mode, epsilon: f64) -> Self {
        Self {
            model,
            scheme,
            mode,
            epsilon,
            delta: DEFAULT_DELTA,
            seed: 0,
            overrides: ScheduleOverrides::default(),
            exec: Execution::default(),
            log_every: 1,
            init: None,
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Spec(msg));
        if !(self.epsilon > 0.0) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.mode == Mode::Stochastic && !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta must lie in (0, 1), got {}", self.delta));
        }
        if let ModelSource::File(p) = &self.model {
            if !p.is_file() {
                return bad(format!("model file {} does not exist", p.display()));
            }
        }
        if let Some(p) = &self.init {
            if !p.is_file() {
                return bad(format!("checkpoint {} does not exist", p.display()));
            }
        }
        let o = &self.overrides;
        if o.eta.is_some_and(|e| !(e > 0.0 && e.is_finite())) {
            return bad("eta must be positive and finite".into());
        }
        if o.steps == Some(0) {
            return bad("steps must be positive".into());
        }
        if o.batch == Some(0) {
            return bad("batch must be positive".into());
        }
        if o.c.is_some_and(|c| !(c > 0.0 && c <= 1.0)) {
            return bad("c must lie in (0, 1]".into());
        }
        if o.budget.is_some_and(|b| !(b > 0.0)) {
            return bad("budget must be positive".into());
        }
        if self.mode == Mode::Stochastic
            && !o.theorem_scale
            && (o.steps.is_none() || o.batch.is_none())
        {
            return bad("stochastic runs need steps and batch, or theorem scale".into());
        }
        Ok(())
    }

    fn budget(&self) -> f64 {
        self.overrides.budget.unwrap_or(match self.mode {
            Mode::Exact => DEFAULT_EXACT_BUDGET,
            Mode::Stochastic => DEFAULT_STOCHASTIC_BUDGET,
        })
    }
}

/// How the step counts of a run were chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleSource {
    Theorem,
    User,
    /// No finite theorem count exists; the budget caps an early-stopped run.
    BudgetCap,
}

/// Per-phase schedule, listed by epoch for the dynamic scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleUsed {
    pub source: ScheduleSource,
    pub eta: Vec<f64>,
    pub steps: Vec<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub batch: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub c: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub model: String,
    pub scheme: SchemeKind,
    pub mode: Mode,
    pub epsilon: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    pub seed: u64,
    pub optimal_value: f64,
    pub final_value: f64,
    /// `V_0*(μ) - V_0(μ)` at the model's start distribution.
    pub final_subopt: f64,
    /// `max_s V_0*(s) - V_0(s)` over epoch-0 states.
    pub max_state_subopt: f64,
    pub grad_evals_total: u64,
    pub early_stopped: bool,
    pub c_hat: f64,
    pub schedule_used: ScheduleUsed,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trajectories_total: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub coupling_crossed: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub log: TrainLog,
    pub summary: Summary,
    pub theta: ParamTensor,
}

fn c_constant(mdp: &FiniteMdp, c: Option<f64>) -> CConstant {
    c.map_or(CConstant::UniformInit, |c| CConstant::Given(vec![c; mdp.horizon()]))
}

fn exact_dynamic_schedule(
    mdp: &FiniteMdp,
    mu_list: &[Vec<f64>],
    spec: &ExperimentSpec,
) -> Result<(DynamicSchedule, ScheduleSource), ExperimentError> {
    let o = &spec.overrides;
    let mut schedule = schedule_dynamic(mdp, mu_list, spec.epsilon, &c_constant(mdp, o.c))?;
    for e in &mut schedule.epochs {
        if let Some(eta) = o.eta {
            e.eta = eta;
        }
        if let Some(n) = o.steps {
            e.n_steps = n;
        }
    }
    let source = if o.eta.is_some() || o.steps.is_some() {
        ScheduleSource::User
    } else {
        ScheduleSource::Theorem
    };
    Ok((schedule, source))
}

fn check_exact_budget(steps: u64, budget: f64) -> Result<(), BudgetError> {
    if steps as f64 > budget {
        return Err(BudgetError::Exceeded {
            required: steps as f64,
            budget,
        });
    }
    Ok(())
}

struct Run {
    train: TrainOutput,
    schedule: ScheduleUsed,
    trajectories: Option<f64>,
    crossed: Option<bool>,
}

fn run_exact(
    mdp: &FiniteMdp,
    theta0: &ParamTensor,
    spec: &ExperimentSpec,
) -> Result<Run, ExperimentError> {
    let o = &spec.overrides;
    let budget = spec.budget();
    let opts = TrainOptions {
        log_every: spec.log_every,
        early_stop: o.early_stop.then_some(spec.epsilon),
    };
    match spec.scheme {
        SchemeKind::Simultaneous => {
            let mu = mdp.start();
            let eta = o.eta.unwrap_or_else(|| simultaneous_step_size(mdp));
            let c = o.c.unwrap_or(1.0 / mdp.max_actions() as f64);
            let (n_steps, source) = match o.steps {
                Some(n) => (n, ScheduleSource::User),
                None => {
                    match schedule_simultaneous(mdp, mu, spec.epsilon, c, o.allow_non_constant) {
                        Ok(s) => (s.n_steps, ScheduleSource::Theorem),
                        Err(ScheduleError::UnboundedMismatch { .. }) if o.early_stop => {
                            (budget.min(u64::MAX as f64) as u64, ScheduleSource::BudgetCap)
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            };
            check_exact_budget(n_steps, budget)?;
            let train = train_simultaneous(mdp, theta0, mu, eta, n_steps, &opts, None)?;
            Ok(Run {
                train,
                schedule: ScheduleUsed {
                    source,
                    eta: vec![eta],
                    steps: vec![n_steps],
                    batch: None,
                    c: (source == ScheduleSource::Theorem).then(|| vec![c]),
                },
                trajectories: None,
                crossed: None,
            })
        }
        SchemeKind::Dynamic => {
            let mu_list = uniform_mu_list(mdp);
            let (schedule, source) = exact_dynamic_schedule(mdp, &mu_list, spec)?;
            check_exact_budget(schedule.total_steps(), budget)?;
            let train = train_dynamic(mdp, theta0, &mu_list, &schedule, &opts, None)?;
            Ok(Run {
                train,
                schedule: ScheduleUsed {
                    source,
                    eta: schedule.epochs.iter().map(|e| e.eta).collect(),
                    steps: schedule.epochs.iter().map(|e| e.n_steps).collect(),
                    batch: None,
                    c: Some(schedule.epochs.iter().map(|e| e.c).collect()),
                },
                trajectories: None,
                crossed: None,
            })
        }
    }
}

fn run_stochastic(
    mdp: &FiniteMdp,
    theta0: &ParamTensor,
    spec: &ExperimentSpec,
) -> Result<Run, ExperimentError> {
    let o = &spec.overrides;
    let budget = spec.budget();
    let mu_list = uniform_mu_list(mdp);
    let (mut schedule, source) = if o.theorem_scale {
        let scale = match spec.scheme {
            SchemeKind::Simultaneous => theorem_simultaneous(
                mdp,
                mdp.start(),
                spec.epsilon,
                spec.delta,
                o.c.unwrap_or(1.0 / mdp.max_actions() as f64),
                o.allow_non_constant,
            )?,
            SchemeKind::Dynamic => theorem_dynamic(
                mdp,
                &mu_list,
                spec.epsilon,
                spec.delta,
                &c_constant(mdp, o.c),
            )?,
        };
        (scale.into_schedule(budget)?, ScheduleSource::Theorem)
    } else {
        let (n, k) = match (o.steps, o.batch) {
            (Some(n), Some(k)) => (n, k),
            _ => {
                return Err(ExperimentError::Spec(
                    "stochastic runs need steps and batch, or theorem scale".into(),
                ))
            }
        };
        let s = match spec.scheme {
            SchemeKind::Simultaneous => StochasticSchedule::simultaneous(mdp, n, k),
            SchemeKind::Dynamic => StochasticSchedule::dynamic(mdp, n, k),
        };
        let required = s.total_trajectories();
        if required > budget {
            return Err(BudgetError::Exceeded { required, budget }.into());
        }
        (s, ScheduleSource::User)
    };
    if let Some(eta) = o.eta {
        match &mut schedule {
            StochasticSchedule::Simultaneous(e) => e.eta = eta,
            StochasticSchedule::Dynamic(es) => es.iter_mut().for_each(|e| e.eta = eta),
        }
    }
    let opts = StochasticOptions {
        seed: spec.seed,
        exec: spec.exec,
        coupling: true,
        log_every: spec.log_every,
        early_stop: o.early_stop.then_some(spec.epsilon),
        ..StochasticOptions::default()
    };
    let trajectories = Some(schedule.total_trajectories());
    let (out, used) = match &schedule {
        StochasticSchedule::Simultaneous(e) => (
            crate::stochastic::train_stochastic_simultaneous(
                mdp,
                theta0,
                mdp.start(),
                e,
                &opts,
                None,
            )?,
            vec![*e],
        ),
        StochasticSchedule::Dynamic(es) => (
            crate::stochastic::train_stochastic_dynamic(mdp, theta0, &mu_list, es, &opts, None)?,
            es.clone(),
        ),
    };
    Ok(Run {
        crossed: out.coupling.as_ref().map(|c| c.crossed()),
        train: out.train,
        schedule: ScheduleUsed {
            source,
            eta: used.iter().map(|e| e.eta).collect(),
            steps: used.iter().map(|e| e.n_steps).collect(),
            batch: Some(used.iter().map(|e| e.batch).collect()),
            c: None,
        },
        trajectories,
    })
}

/// Writes `log.csv`, `summary.json` and `theta.json` into `dir`.
pub fn write_outputs(
    dir: &Path,
    mdp: &FiniteMdp,
    result: &ExperimentResult,
) -> Result<(), ExperimentError> {
    fs::create_dir_all(dir)?;
    result.log.write_csv(fs::File::create(dir.join(LOG_FILE))?)?;
    let mut summary = serde_json::to_string_pretty(&result.summary)?;
    summary.push('\n');
    fs::write(dir.join(SUMMARY_FILE), summary)?;
    fs::write(dir.join(THETA_FILE), result.theta.to_checkpoint_string(mdp))?;
    Ok(())
}

/// Runs the trainer selected by `spec` and, when `spec.out_dir` is set,
/// writes the log, summary and final parameters. An early-stopped run that
/// used the whole budget cap without reaching `ε` writes its outputs and
/// then reports [`ExperimentError::NotReached`].
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult, ExperimentError> {
    spec.validate()?;
    let mdp = spec.model.load()?;
    let theta0 = match &spec.init {
        Some(p) => ParamTensor::from_checkpoint_file(&mdp, p)?,
        None => ParamTensor::zeros(&mdp),
    };
    let run = match spec.mode {
        Mode::Exact => run_exact(&mdp, &theta0, spec)?,
        Mode::Stochastic => run_stochastic(&mdp, &theta0, spec)?,
    };

    let (optimal, _) = backward_induction_optimal(&mdp);
    let tables = evaluate_policy(&mdp, &policy_of(&run.train.theta));
    let start = mdp.start();
    let optimal_value = optimal.value(0, start);
    let final_value = tables.value(0, start);
    let max_state_subopt = optimal.v[0]
        .iter()
        .zip(&tables.v[0])
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    let summary = Summary {
        model: spec.model.to_string(),
        scheme: spec.scheme,
        mode: spec.mode,
        epsilon: spec.epsilon,
        delta: (spec.mode == Mode::Stochastic).then_some(spec.delta),
        seed: spec.seed,
        optimal_value,
        final_value,
        final_subopt: optimal_value - final_value,
        max_state_subopt,
        grad_evals_total: run.train.grad_evals,
        early_stopped: run.train.early_stopped,
        c_hat: run.train.c_hat,
        schedule_used: run.schedule,
        trajectories_total: run.trajectories,
        coupling_crossed: run.crossed,
    };
    let result = ExperimentResult {
        log: run.train.log,
        summary,
        theta: run.train.theta,
    };
    if let Some(dir) = &spec.out_dir {
        write_outputs(dir, &mdp, &result)?;
    }
    let s = &result.summary;
    if s.schedule_used.source == ScheduleSource::BudgetCap && !s.early_stopped {
        return Err(ExperimentError::NotReached {
            budget: s.grad_evals_total,
            subopt: s.final_subopt,
            epsilon: spec.epsilon,
        });
    }
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompareOptions {
    /// Simultaneous step size; defaults to `1/(5H²R*)`.
    pub sim_eta: Option<f64>,
    /// Per-cell cap on update steps.
    pub budget: u64,
    /// Lower bound `c_h` for the dynamic schedule; defaults to `1/|𝒜|`.
    pub c: Option<f64>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            sim_eta: None,
            budget: DEFAULT_EXACT_BUDGET as u64,
            c: None,
        }
    }
}

/// Outcome of one (scheme, ε) run; `evals` is `None` when ε was not reached
/// within the budget or the schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareCell {
    pub evals: Option<u64>,
    pub final_subopt: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub epsilon: f64,
    pub evals_dynamic: Option<u64>,
    pub evals_simultaneous: Option<u64>,
    pub dynamic: CompareCell,
    pub simultaneous: CompareCell,
}

fn compare_cell(
    mdp: &FiniteMdp,
    scheme: SchemeKind,
    epsilon: f64,
    opts: &CompareOptions,
) -> CompareCell {
    let theta0 = ParamTensor::zeros(mdp);
    let train_opts = TrainOptions {
        log_every: u64::MAX,
        early_stop: Some(epsilon),
    };
    let failed = |note: String| CompareCell {
        evals: None,
        final_subopt: f64::NAN,
        note: Some(note),
    };
    let out = match scheme {
        SchemeKind::Simultaneous => {
            let eta = opts.sim_eta.unwrap_or_else(|| simultaneous_step_size(mdp));
            train_simultaneous(mdp, &theta0, mdp.start(), eta, opts.budget, &train_opts, None)
        }
        SchemeKind::Dynamic => {
            let mu_list = uniform_mu_list(mdp);
            let schedule = match schedule_dynamic(mdp, &mu_list, epsilon, &c_constant(mdp, opts.c))
            {
                Ok(s) => s,
                Err(e) => return failed(e.to_string()),
            };
            if schedule.total_steps() > opts.budget {
                return failed(format!(
                    "schedule needs {} steps, budget is {}",
                    schedule.total_steps(),
                    opts.budget
                ));
            }
            train_dynamic(mdp, &theta0, &mu_list, &schedule, &train_opts, None)
        }
    };
    match out {
        Ok(out) => {
            let final_subopt = out.log.last().map_or(f64::NAN, |r| r.subopt);
            let reached = out.early_stopped;
            CompareCell {
                evals: reached.then_some(out.grad_evals),
                final_subopt,
                note: (!reached).then(|| format!("not reached after {} steps", out.grad_evals)),
            }
        }
        Err(e) => failed(e.to_string()),
    }
}

/// Gradient evaluations each exact scheme spends, from `θ = 0`, until the
/// suboptimality at the model's start distribution is at most ε. The
/// dynamic run uses its theorem schedule for that ε. Cells run in parallel.
pub fn compare_schemes(
    mdp: &FiniteMdp,
    eps_list: &[f64],
    opts: &CompareOptions,
) -> Result<Vec<CompareRow>, ExperimentError> {
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0)) {
        return Err(ExperimentError::Spec(format!("epsilon must be positive, got {e}")));
    }
    let cells: Vec<CompareCell> = eps_list
        .par_iter()
        .flat_map_iter(|&eps| {
            [SchemeKind::Dynamic, SchemeKind::Simultaneous].map(|scheme| (eps, scheme))
        })
        .map(|(eps, scheme)| compare_cell(mdp, scheme, eps, opts))
        .collect();
    Ok(eps_list
        .iter()
        .zip(cells.chunks(2))
        .map(|(&epsilon, pair)| CompareRow {
            epsilon,
            evals_dynamic: pair[0].evals,
            evals_simultaneous: pair[1].evals,
            dynamic: pair[0].clone(),
            simultaneous: pair[1].clone(),
        })
        .collect())
}
