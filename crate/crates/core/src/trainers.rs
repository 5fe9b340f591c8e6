//! Exact-gradient training: simultaneous ascent on all epochs (Algorithm 1
//! style) and backward-in-time ascent one epoch at a time (Algorithm 2
//! style), with step-size and step-count schedules derived from a target
//! accuracy, and the per-step training log.

use std::io::{Read, Write};

use thiserror::Error;

use crate::gradient::{
    epoch_q_values, eval_simultaneous, grad_dynamic_from_q, objective_dynamic_from_q,
    DynamicOracle, SimultaneousOracle,
};
use crate::mdp::{state_visitation, Block, FiniteMdp, MdpError, TabularPolicy};
use crate::softmax::{add_scaled_block, policy_of, softmax_block, GradTensor, ParamTensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScheduleError {
    #[error("target accuracy must be positive, got {0}")]
    NonPositiveEpsilon(f64),
    #[error("c estimate must lie in (0, 1], got {0}")]
    CEstimateOutOfRange(f64),
    #[error("failure probability delta must lie in (0, 1), got {0}")]
    InvalidDelta(f64),
    #[error("state space differs across epochs; pass an explicit override to size the simultaneous schedule")]
    NonConstantStateSpace,
    #[error("start distribution has no mass on state {state:?}, which the optimal policy visits; the mismatch bound is infinite")]
    UnboundedMismatch { state: String },
    #[error("start distribution for epoch {epoch} has no mass on state {state:?}")]
    ZeroStartMass { epoch: usize, state: String },
    #[error("expected {expected} per-epoch entries, got {found}")]
    EpochCount { expected: usize, found: usize },
    #[error(transparent)]
    Distribution(#[from] MdpError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrainError {
    #[error("non-finite gradient or parameter at step {step}")]
    NonFinite { step: u64 },
    #[error("parameter tensor does not match the model layout")]
    Shape,
    #[error(transparent)]
    Distribution(#[from] MdpError),
}

/// Step size and step count for simultaneous training.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimultaneousSchedule {
    pub eta: f64,
    pub n_steps: u64,
    /// `N` before rounding up.
    pub n_real: f64,
    pub c_estimate: f64,
    /// `‖d_μ^{π*}/μ‖_∞`.
    pub mismatch: f64,
}

/// `η = 1/(5 H² R*)`.
pub fn simultaneous_step_size(mdp: &FiniteMdp) -> f64 {
    let h = mdp.horizon() as f64;
    1.0 / (5.0 * h * h * mdp.r_star())
}

/// `η = 1/(5H²R*)`, `N = ⌈10 H⁵ R* |S| ‖d*/μ‖²_∞ / (c² ε)⌉` with `d*` the
/// visitation of the backward-induction optimal policy.
///
/// With `allow_non_constant` the formula is evaluated on underlying state
/// names even when epochs carry different state sets, and `|S|` is the
/// number of distinct names.
pub fn schedule_simultaneous(
    mdp: &FiniteMdp,
    mu: &[f64],
    epsilon: f64,
    c_estimate: f64,
    allow_non_constant: bool,
) -> Result<SimultaneousSchedule, ScheduleError> {
    if !(epsilon > 0.0) {
        return Err(ScheduleError::NonPositiveEpsilon(epsilon));
    }
    if !(c_estimate > 0.0 && c_estimate <= 1.0) {
        return Err(ScheduleError::CEstimateOutOfRange(c_estimate));
    }
    if !mdp.has_constant_state_space() && !allow_non_constant {
        return Err(ScheduleError::NonConstantStateSpace);
    }
    mdp.check_distribution(0, mu)?;
    let (_, pi_star) = crate::mdp::backward_induction_optimal(mdp);
    let vis = state_visitation(mdp, &pi_star, mu);
    let mut mismatch: f64 = 0.0;
    for (name, d) in vis.states.iter().zip(&vis.d) {
        if *d == 0.0 {
            continue;
        }
        let m = mdp.state_index(0, name).map_or(0.0, |i| mu[i]);
        if m == 0.0 {
            return Err(ScheduleError::UnboundedMismatch { state: name.clone() });
        }
        mismatch = mismatch.max(d / m);
    }
    let h = mdp.horizon() as f64;
    let n_states = vis.states.len() as f64;
    let n_real = 10.0 * h.powi(5) * mdp.r_star() * n_states * mismatch * mismatch
        / (c_estimate * c_estimate * epsilon);
    Ok(SimultaneousSchedule {
        eta: simultaneous_step_size(mdp),
        n_steps: (n_real.ceil() as u64).max(1),
        n_real,
        c_estimate,
        mismatch,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochSchedule {
    pub eta: f64,
    pub n_steps: u64,
    pub n_real: f64,
    pub c: f64,
}

/// Per-epoch schedules, indexed by epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicSchedule {
    pub epochs: Vec<EpochSchedule>,
}

impl DynamicSchedule {
    pub fn total_steps(&self) -> u64 {
        self.epochs.iter().map(|e| e.n_steps).sum()
    }
}

/// Source of the per-epoch constants `c_h` used in sizing.
#[derive(Debug, Clone, PartialEq)]
pub enum CConstant {
    /// Uniform initialisation: `c_h = 1/|𝒜|`.
    UniformInit,
    Given(Vec<f64>),
}

/// `η_h = 1/(2(H-h)R*)`.
pub fn dynamic_step_size(mdp: &FiniteMdp, h: usize) -> f64 {
    1.0 / (2.0 * (mdp.horizon() - h) as f64 * mdp.r_star())
}

/// `η_h = 1/(2(H-h)R*)`, `N_h = ⌈4 (H-h) H R* ‖1/μ_h‖_∞ / (c_h² ε)⌉`.
pub fn schedule_dynamic(
    mdp: &FiniteMdp,
    mu_list: &[Vec<f64>],
    epsilon: f64,
    c: &CConstant,
) -> Result<DynamicSchedule, ScheduleError> {
    if !(epsilon > 0.0) {
        return Err(ScheduleError::NonPositiveEpsilon(epsilon));
    }
    let horizon = mdp.horizon();
    if mu_list.len() != horizon {
        return Err(ScheduleError::EpochCount {
            expected: horizon,
            found: mu_list.len(),
        });
    }
    let cs: Vec<f64> = match c {
        CConstant::UniformInit => vec![1.0 / mdp.max_actions() as f64; horizon],
        CConstant::Given(v) if v.len() == horizon => v.clone(),
        CConstant::Given(v) => {
            return Err(ScheduleError::EpochCount {
                expected: horizon,
                found: v.len(),
            })
        }
    };
    let mut epochs = Vec::with_capacity(horizon);
    for (h, mu_h) in mu_list.iter().enumerate() {
        mdp.check_distribution(h, mu_h)?;
        if let Some(s) = mu_h.iter().position(|m| *m == 0.0) {
            return Err(ScheduleError::ZeroStartMass {
                epoch: h,
                state: mdp.state_name(h, s).to_owned(),
            });
        }
        let c_h = cs[h];
        if !(c_h > 0.0 && c_h <= 1.0) {
            return Err(ScheduleError::CEstimateOutOfRange(c_h));
        }
        let inv_mu = mu_h.iter().map(|m| 1.0 / m).fold(0.0, f64::max);
        let n_real = 4.0 * (horizon - h) as f64 * horizon as f64 * mdp.r_star() * inv_mu
            / (c_h * c_h * epsilon);
        epochs.push(EpochSchedule {
            eta: dynamic_step_size(mdp, h),
            n_steps: (n_real.ceil() as u64).max(1),
            n_real,
            c: c_h,
        });
    }
    Ok(DynamicSchedule { epochs })
}

/// Uniform distributions over every epoch's states.
pub fn uniform_mu_list(mdp: &FiniteMdp) -> Vec<Vec<f64>> {
    (0..mdp.horizon()).map(|h| mdp.uniform_distribution(h)).collect()
}

/// Which parameters a log row's update touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    All,
    Epoch(usize),
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::All => f.write_str("all"),
            Phase::Epoch(h) => write!(f, "{h}"),
        }
    }
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            Ok(Phase::All)
        } else {
            s.parse().map(Phase::Epoch).map_err(|_| format!("bad phase {s:?}"))
        }
    }
}

/// One logged iterate. `j` and `subopt` refer to `V_0(μ)` of the full
/// current policy; the gradient, PL and optimal-action columns refer to the
/// objective being optimised in `phase`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRow {
    pub grad_evals: u64,
    pub phase: Phase,
    pub j: f64,
    pub grad_norm: f64,
    pub min_opt_prob: f64,
    pub pl_lhs: Option<f64>,
    pub pl_rhs: Option<f64>,
    pub subopt: f64,
    pub batch_size: Option<u64>,
    pub coupling_dist: Option<f64>,
    pub crossed: Option<bool>,
}

#[derive(Debug, Error)]
pub enum LogError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("unexpected header {0:?}")]
    Header(Vec<String>),
    #[error("row {row}: cannot parse column {column}: {value:?}")]
    Field {
        row: usize,
        column: &'static str,
        value: String,
    },
}

const EXACT_COLUMNS: [&str; 8] = [
    "grad_evals",
    "phase",
    "J",
    "grad_norm",
    "min_opt_prob",
    "pl_lhs",
    "pl_rhs",
    "subopt",
];
const STOCHASTIC_COLUMNS: [&str; 3] = ["batch_size", "coupling_dist", "crossed"];

/// Sequence of logged iterates with a strictly increasing gradient counter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub rows: Vec<LogRow>,
    /// Whether the stochastic columns are written.
    pub stochastic: bool,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn parse_field<T: std::str::FromStr>(
    record: &csv::StringRecord,
    i: usize,
    row: usize,
) -> Result<T, LogError> {
    let value = record.get(i).unwrap_or("");
    value.parse().map_err(|_| LogError::Field {
        row,
        column: column_name(i),
        value: value.to_owned(),
    })
}

fn parse_opt<T: std::str::FromStr>(
    record: &csv::StringRecord,
    i: usize,
    row: usize,
) -> Result<Option<T>, LogError> {
    match record.get(i) {
        None | Some("") => Ok(None),
        Some(_) => parse_field(record, i, row).map(Some),
    }
}

fn column_name(i: usize) -> &'static str {
    EXACT_COLUMNS
        .iter()
        .chain(&STOCHASTIC_COLUMNS)
        .nth(i)
        .copied()
        .unwrap_or("?")
}

impl TrainLog {
    pub fn new(stochastic: bool) -> Self {
        Self {
            rows: Vec::new(),
            stochastic,
        }
    }

    pub fn push(&mut self, row: LogRow) {
        debug_assert!(self.rows.last().is_none_or(|r| r.grad_evals < row.grad_evals));
        self.rows.push(row);
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), LogError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = EXACT_COLUMNS.to_vec();
        if self.stochastic {
            header.extend(STOCHASTIC_COLUMNS);
        }
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.grad_evals.to_string(),
                r.phase.to_string(),
                r.j.to_string(),
                r.grad_norm.to_string(),
                r.min_opt_prob.to_string(),
                opt(r.pl_lhs),
                opt(r.pl_rhs),
                r.subopt.to_string(),
            ];
            if self.stochastic {
                rec.push(opt(r.batch_size));
                rec.push(opt(r.coupling_dist));
                rec.push(opt(r.crossed));
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self, LogError> {
        let mut r = csv::Reader::from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
        let exact: Vec<String> = EXACT_COLUMNS.iter().map(|s| s.to_string()).collect();
        let full: Vec<String> = EXACT_COLUMNS
            .iter()
            .chain(&STOCHASTIC_COLUMNS)
            .map(|s| s.to_string())
            .collect();
        let stochastic = if header == exact {
            false
        } else if header == full {
            true
        } else {
            return Err(LogError::Header(header));
        };
        let mut log = TrainLog::new(stochastic);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let row = LogRow {
                grad_evals: parse_field(&rec, 0, i)?,
                phase: parse_field(&rec, 1, i)?,
                j: parse_field(&rec, 2, i)?,
                grad_norm: parse_field(&rec, 3, i)?,
                min_opt_prob: parse_field(&rec, 4, i)?,
                pl_lhs: parse_opt(&rec, 5, i)?,
                pl_rhs: parse_opt(&rec, 6, i)?,
                subopt: parse_field(&rec, 7, i)?,
                batch_size: if stochastic { parse_opt(&rec, 8, i)? } else { None },
                coupling_dist: if stochastic { parse_opt(&rec, 9, i)? } else { None },
                crossed: if stochastic { parse_opt(&rec, 10, i)? } else { None },
            };
            log.rows.push(row);
        }
        Ok(log)
    }
}

/// Gradient attached to a [`StepView`].
#[derive(Debug, Clone, Copy)]
pub enum GradView<'a> {
    Full(&'a GradTensor),
    Epoch { h: usize, grad: &'a Block },
}

/// Every iterate is reported to the sink, whether or not it is logged.
#[derive(Debug, Clone, Copy)]
pub struct StepView<'a> {
    pub row: &'a LogRow,
    pub theta: &'a ParamTensor,
    pub grad: GradView<'a>,
    /// `J(θ, μ)` for the simultaneous scheme, `J_h(θ_h)` for phase `h`.
    pub phase_objective: f64,
    /// Dynamic scheme: `rhs / √|S_h|`.
    pub pl_rhs_normalised: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    /// Keep one row in `log_every` (the first and last row of every phase
    /// are always kept).
    pub log_every: u64,
    /// Stop as soon as `V_0*(μ) - V_0(μ) ≤` this value.
    pub early_stop: Option<f64>,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            log_every: 1,
            early_stop: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainOutput {
    pub theta: ParamTensor,
    pub log: TrainLog,
    /// Gradient computations spent on updates.
    pub grad_evals: u64,
    pub early_stopped: bool,
    /// Running minimum of the logged optimal-action probability.
    pub c_hat: f64,
}

pub type Sink<'a> = &'a mut dyn FnMut(&StepView<'_>);

fn keep(n: u64, last: bool, opts: &TrainOptions) -> bool {
    last || n % opts.log_every.max(1) == 0
}

fn reached(opts: &TrainOptions, subopt: f64) -> bool {
    opts.early_stop.is_some_and(|eps| subopt <= eps)
}

/// `θ^{(n+1)} = θ^{(n)} + η ∇J(θ^{(n)}, μ)` for `n < n_steps`.
pub fn train_simultaneous(
    mdp: &FiniteMdp,
    theta0: &ParamTensor,
    mu: &[f64],
    eta: f64,
    n_steps: u64,
    opts: &TrainOptions,
    sink: Option<Sink<'_>>,
) -> Result<TrainOutput, TrainError> {
    if !theta0.matches(mdp) {
        return Err(TrainError::Shape);
    }
    mdp.check_distribution(0, mu)?;
    let oracle = SimultaneousOracle::new(mdp, mu);
    let mut sink = sink;
    let mut theta = theta0.clone();
    let mut log = TrainLog::new(false);
    let mut c_hat = f64::INFINITY;
    let mut n = 0u64;
    let early_stopped = loop {
        let eval = eval_simultaneous(mdp, &theta, mu);
        if !eval.grad.is_finite() || !eval.objective.is_finite() {
            return Err(TrainError::NonFinite { step: n });
        }
        let cert = oracle.certificate(mdp, mu, &eval);
        c_hat = c_hat.min(cert.min_opt_prob);
        let row = LogRow {
            grad_evals: n,
            phase: Phase::All,
            j: eval.objective,
            grad_norm: cert.lhs,
            min_opt_prob: cert.min_opt_prob,
            pl_lhs: Some(cert.lhs),
            pl_rhs: cert.rhs,
            subopt: cert.suboptimality,
            batch_size: None,
            coupling_dist: None,
            crossed: None,
        };
        if let Some(f) = sink.as_mut() {
            f(&StepView {
                row: &row,
                theta: &theta,
                grad: GradView::Full(&eval.grad),
                phase_objective: eval.objective,
                pl_rhs_normalised: None,
            });
        }
        let stop = reached(opts, row.subopt);
        let last = n == n_steps || stop;
        if keep(n, last, opts) {
            log.push(row);
        }
        if last {
            break stop;
        }
        theta.add_scaled(&eval.grad, eta);
        n += 1;
    };
    Ok(TrainOutput {
        theta,
        log,
        grad_evals: n,
        early_stopped,
        c_hat,
    })
}

/// Backward sweep `h = H-1, …, 0`: `n_steps[h]` ascent steps on `θ_h` with
/// step `eta[h]` against the already trained later epochs.
pub fn train_dynamic(
    mdp: &FiniteMdp,
    theta0: &ParamTensor,
    mu_list: &[Vec<f64>],
    schedule: &DynamicSchedule,
    opts: &TrainOptions,
    sink: Option<Sink<'_>>,
) -> Result<TrainOutput, TrainError> {
    let horizon = mdp.horizon();
    if !theta0.matches(mdp) || mu_list.len() != horizon || schedule.epochs.len() != horizon {
        return Err(TrainError::Shape);
    }
    for (h, mu_h) in mu_list.iter().enumerate() {
        mdp.check_distribution(h, mu_h)?;
    }
    let start = mdp.start().to_vec();
    let optimal = crate::mdp::backward_induction_optimal(mdp).0.value(0, &start);
    let mut sink = sink;
    let mut theta = theta0.clone();
    let mut log = TrainLog::new(false);
    let mut c_hat = f64::INFINITY;
    let mut n = 0u64;
    let mut early_stopped = false;

    'phases: for h in (0..horizon).rev() {
        let EpochSchedule { eta, n_steps, .. } = schedule.epochs[h];
        let mu_h = &mu_list[h];
        let tilde: TabularPolicy = policy_of(&theta);
        let oracle = DynamicOracle::new(epoch_q_values(mdp, &tilde, h), mu_h);
        for k in 0..=n_steps {
            let block = theta.block(h);
            let grad = grad_dynamic_from_q(&oracle.q_h, block, mu_h);
            let pi_h = softmax_block(block);
            let phase_objective = objective_dynamic_from_q(&oracle.q_h, block, mu_h);
            if grad.iter().flatten().any(|g| !g.is_finite()) || !phase_objective.is_finite() {
                return Err(TrainError::NonFinite { step: n });
            }
            let cert = oracle.certificate(&pi_h, &grad, phase_objective);
            c_hat = c_hat.min(cert.min_opt_prob);
            // The first iterate of a later phase repeats the counter and J of
            // the last row of the previous phase, so it reaches the sink only.
            let fresh = k > 0 || h + 1 == horizon;
            let stop_phase = k == n_steps;
            let j = crate::mdp::evaluate_policy(mdp, &policy_of(&theta)).value(0, &start);
            let row = LogRow {
                grad_evals: n,
                phase: Phase::Epoch(h),
                j,
                grad_norm: cert.lhs,
                min_opt_prob: cert.min_opt_prob,
                pl_lhs: Some(cert.lhs),
                pl_rhs: cert.rhs,
                subopt: optimal - j,
                batch_size: None,
                coupling_dist: None,
                crossed: None,
            };
            if let Some(f) = sink.as_mut() {
                f(&StepView {
                    row: &row,
                    theta: &theta,
                    grad: GradView::Epoch { h, grad: &grad },
                    phase_objective,
                    pl_rhs_normalised: cert.rhs_normalised,
                });
            }
            if fresh {
                let stop = reached(opts, row.subopt);
                if keep(n, stop_phase || stop, opts) {
                    log.push(row);
                }
                if stop {
                    early_stopped = true;
                    break 'phases;
                }
            }
            if stop_phase {
                break;
            }
            add_scaled_block(theta.block_mut(h), &grad, eta);
            n += 1;
        }
    }
    Ok(TrainOutput {
        theta,
        log,
        grad_evals: n,
        early_stopped,
        c_hat,
    })
}
