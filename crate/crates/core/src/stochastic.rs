//! REINFORCE gradient estimators with reward-to-go, stochastic training in
//! both schemes, theorem-scale `(N, η, K)` prescriptions, and the coupling
//! diagnostic that runs exact and stochastic ascent side by side.

use rayon::prelude::*;
use thiserror::Error;

use crate::gradient::{
    epoch_q_values, eval_simultaneous, grad_dynamic_from_q, objective_dynamic_from_q,
    DynamicOracle, SimultaneousOracle,
};
use crate::mdp::{
    backward_induction_optimal, evaluate_policy, sample_trajectory, Block,
    FiniteMdp, Substreams, TabularPolicy, Trajectory,
};
use crate::softmax::{add_scaled_block, block_norm, policy_of, softmax_block, GradTensor, ParamTensor};
use crate::trainers::{
    CConstant, GradView, LogRow, Phase, ScheduleError, StepView, TrainError, TrainLog,
    TrainOutput,
};

/// Trajectories sampled per parallel chunk; bounds memory for large batches.
const CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

/// Source of the update direction in the stochastic trainers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EstimatorKind {
    #[default]
    Reinforce,
    /// The exact gradient, the infinite-batch limit of the estimator.
    Exact,
}

fn sample_batch(
    mdp: &FiniteMdp,
    policy: &TabularPolicy,
    mu: &[f64],
    start_epoch: usize,
    k: usize,
    streams: &Substreams,
    step: u64,
    exec: Execution,
    mut consume: impl FnMut(&Trajectory),
) {
    let mut lo = 0;
    while lo < k {
        let hi = (lo + CHUNK).min(k);
        let draw = |i: usize| {
            sample_trajectory(mdp, policy, mu, start_epoch, &mut streams.rng(step, i as u64))
        };
        let batch: Vec<Trajectory> = match exec {
            Execution::Sequential => (lo..hi).map(draw).collect(),
            Execution::Parallel => (lo..hi).into_par_iter().map(draw).collect(),
        };
        batch.iter().for_each(&mut consume);
        lo = hi;
    }
}

/// Adds `weight · ∇ log π(a|s)` to row `grad_row`, where `pi` is the row of
/// the sampled state.
fn add_log_grad(grad_row: &mut [f64], pi: &[f64], action: usize, weight: f64) {
    for (b, (g, p)) in grad_row.iter_mut().zip(pi).enumerate() {
        let indicator = if b == action { 1.0 } else { 0.0 };
        *g += (indicator - p) * weight;
    }
}

/// `(1/K) Σ_i Σ_h ∇ log π^θ(a_h^i|s_h^i) R̂_h^i`. Trajectory `i` uses the
/// stream `(step, i)`, and contributions are accumulated in index order, so
/// the result does not depend on `exec`.
pub fn estimate_grad_simultaneous(
    mdp: &FiniteMdp,
    theta: &ParamTensor,
    mu: &[f64],
    k: usize,
    streams: &Substreams,
    step: u64,
    exec: Execution,
) -> GradTensor {
    let policy = policy_of(theta);
    let mut grad = theta.zeros_like();
    sample_batch(mdp, &policy, mu, 0, k, streams, step, exec, |traj| {
        for (h, st) in traj.steps.iter().enumerate() {
            let row = &mut grad.block_mut(h)[st.state];
            add_log_grad(row, policy.row(h, st.state), st.action, traj.reward_to_go(h));
        }
    });
    let inv = 1.0 / k as f64;
    for h in 0..grad.horizon() {
        grad.block_mut(h).iter_mut().flatten().for_each(|g| *g *= inv);
    }
    grad
}

/// `(1/K_h) Σ_i ∇ log π^{θ_h}(a_h^i|s_h^i) R̂_h^i` with trajectories started at
/// epoch `h` from `μ_h`, the first action drawn from `π^{θ_h}` and later
/// actions from `π̃`.
#[allow(clippy::too_many_arguments)]
pub fn estimate_grad_dynamic(
    mdp: &FiniteMdp,
    theta_h: &Block,
    tilde_pi: &TabularPolicy,
    mu_h: &[f64],
    h: usize,
    k: usize,
    streams: &Substreams,
    step: u64,
    exec: Execution,
) -> Block {
    let pi_h = softmax_block(theta_h);
    let policy = tilde_pi.with_epoch(h, pi_h.clone());
    let mut grad: Block = theta_h.iter().map(|row| vec![0.0; row.len()]).collect();
    sample_batch(mdp, &policy, mu_h, h, k, streams, step, exec, |traj| {
        let st = traj.at(h);
        add_log_grad(&mut grad[st.state], &pi_h[st.state], st.action, traj.reward_to_go(h));
    });
    let inv = 1.0 / k as f64;
    grad.iter_mut().flatten().for_each(|g| *g *= inv);
    grad
}

/// `ξ = 3 H⁴ max{R*, 1}⁴`, the variance constant of the simultaneous
/// estimator with batch one.
pub fn variance_bound_simultaneous(mdp: &FiniteMdp) -> f64 {
    3.0 * (mdp.horizon() as f64).powi(4) * mdp.r_star().max(1.0).powi(4)
}

/// `ψ_h = 5 (H-h)² R*²`.
pub fn variance_bound_dynamic(mdp: &FiniteMdp, h: usize) -> f64 {
    5.0 * ((mdp.horizon() - h) as f64).powi(2) * mdp.r_star().powi(2)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticEpoch {
    pub eta: f64,
    pub n_steps: u64,
    pub batch: usize,
}

/// Step sizes, step counts and batch sizes for a stochastic run.
#[derive(Debug, Clone, PartialEq)]
pub enum StochasticSchedule {
    Simultaneous(StochasticEpoch),
    /// Indexed by epoch.
    Dynamic(Vec<StochasticEpoch>),
}

impl StochasticSchedule {
    /// User-chosen `N` and `K` with `η = 1/(5H²R*√N)`.
    pub fn simultaneous(mdp: &FiniteMdp, n_steps: u64, batch: usize) -> Self {
        let h = mdp.horizon() as f64;
        Self::Simultaneous(StochasticEpoch {
            eta: 1.0 / (5.0 * h * h * mdp.r_star() * (n_steps as f64).sqrt()),
            n_steps,
            batch,
        })
    }

    /// User-chosen `N_h = N` and `K_h = K` for every epoch with
    /// `η_h = 1/(2(H-h)R*√N)`.
    pub fn dynamic(mdp: &FiniteMdp, n_steps: u64, batch: usize) -> Self {
        let horizon = mdp.horizon();
        Self::Dynamic(
            (0..horizon)
                .map(|h| StochasticEpoch {
                    eta: 1.0 / (2.0 * (horizon - h) as f64 * mdp.r_star() * (n_steps as f64).sqrt()),
                    n_steps,
                    batch,
                })
                .collect(),
        )
    }

    /// Sampled trajectories over the whole run, `Σ N·K`.
    pub fn total_trajectories(&self) -> f64 {
        match self {
            Self::Simultaneous(e) => e.n_steps as f64 * e.batch as f64,
            Self::Dynamic(es) => es.iter().map(|e| e.n_steps as f64 * e.batch as f64).sum(),
        }
    }

    pub fn total_steps(&self) -> u64 {
        match self {
            Self::Simultaneous(e) => e.n_steps,
            Self::Dynamic(es) => es.iter().map(|e| e.n_steps).sum(),
        }
    }
}

/// Real-valued theorem prescriptions before rounding; they routinely
/// exceed any integer type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremEpoch {
    pub n_steps: f64,
    pub eta: f64,
    pub batch: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremScale {
    /// One entry for the simultaneous scheme, one per epoch otherwise.
    pub epochs: Vec<TheoremEpoch>,
    pub simultaneous: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BudgetError {
    #[error("theorem-scale schedule needs {required:.3e} sampled trajectories, budget is {budget:.3e}")]
    Exceeded { required: f64, budget: f64 },
}

impl TheoremScale {
    pub fn total_trajectories(&self) -> f64 {
        self.epochs.iter().map(|e| e.n_steps.ceil() * e.batch.ceil()).sum()
    }

    /// Rounds up to a runnable schedule if `Σ N·K` fits in `budget`.
    pub fn into_schedule(&self, budget: f64) -> Result<StochasticSchedule, BudgetError> {
        let required = self.total_trajectories();
        if !(required <= budget) {
            return Err(BudgetError::Exceeded { required, budget });
        }
        let epochs: Vec<StochasticEpoch> = self
            .epochs
            .iter()
            .map(|e| StochasticEpoch {
                eta: e.eta,
                n_steps: e.n_steps.ceil() as u64,
                batch: e.batch.ceil() as usize,
            })
            .collect();
        Ok(if self.simultaneous {
            StochasticSchedule::Simultaneous(epochs[0])
        } else {
            StochasticSchedule::Dynamic(epochs)
        })
    }
}

fn check_probabilities(epsilon: f64, delta: f64) -> Result<(), ScheduleError> {
    if !(epsilon > 0.0) {
        return Err(ScheduleError::NonPositiveEpsilon(epsilon));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(ScheduleError::InvalidDelta(delta));
    }
    Ok(())
}

/// `N = (21|S|H⁵R*/(εδc²))² ‖d*/μ‖⁴_∞`, `η = 1/(5H²R*√N)`,
/// `K = 10 max{R*,1}² N³/(c²δ²)`.
pub fn theorem_simultaneous(
    mdp: &FiniteMdp,
    mu: &[f64],
    epsilon: f64,
    delta: f64,
    c: f64,
    allow_non_constant: bool,
) -> Result<TheoremScale, ScheduleError> {
    check_probabilities(epsilon, delta)?;
    let base = crate::trainers::schedule_simultaneous(mdp, mu, epsilon, c, allow_non_constant)?;
    let h = mdp.horizon() as f64;
    let n_states = mdp.underlying_states().len() as f64;
    let n = (21.0 * n_states * h.powi(5) * mdp.r_star() / (epsilon * delta * c * c)).powi(2)
        * base.mismatch.powi(4);
    let eta = 1.0 / (5.0 * h * h * mdp.r_star() * n.sqrt());
    let k = 10.0 * mdp.r_star().max(1.0).powi(2) * n.powi(3) / (c * c * delta * delta);
    Ok(TheoremScale {
        epochs: vec![TheoremEpoch {
            n_steps: n,
            eta,
            batch: k,
        }],
        simultaneous: true,
    })
}

/// `N_h = (12(H-h)R*H²‖1/μ_h‖_∞/(δc_h²ε))²`, `η_h = 1/(2(H-h)R*√N_h)`,
/// `K_h = 5N_h³H²/(c_h²δ²)`.
pub fn theorem_dynamic(
    mdp: &FiniteMdp,
    mu_list: &[Vec<f64>],
    epsilon: f64,
    delta: f64,
    c: &CConstant,
) -> Result<TheoremScale, ScheduleError> {
    check_probabilities(epsilon, delta)?;
    let base = crate::trainers::schedule_dynamic(mdp, mu_list, epsilon, c)?;
    let horizon = mdp.horizon();
    let hf = horizon as f64;
    let epochs = base
        .epochs
        .iter()
        .enumerate()
        .map(|(h, e)| {
            let rem = (horizon - h) as f64;
            let inv_mu = mu_list[h].iter().map(|m| 1.0 / m).fold(0.0, f64::max);
            let n = (12.0 * rem * mdp.r_star() * hf * hf * inv_mu / (delta * e.c * e.c * epsilon))
                .powi(2);
            TheoremEpoch {
                n_steps: n,
                eta: 1.0 / (2.0 * rem * mdp.r_star() * n.sqrt()),
                batch: 5.0 * n.powi(3) * hf * hf / (e.c * e.c * delta * delta),
            }
        })
        .collect();
    Ok(TheoremScale {
        epochs,
        simultaneous: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticOptions {
    pub seed: u64,
    pub exec: Execution,
    pub estimator: EstimatorKind,
    /// Run the exact iteration in lockstep and record the distance.
    pub coupling: bool,
    pub log_every: u64,
    pub early_stop: Option<f64>,
}

impl Default for StochasticOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            exec: Execution::Parallel,
            estimator: EstimatorKind::Reinforce,
            coupling: false,
            log_every: 1,
            early_stop: None,
        }
    }
}

/// Distances `‖θ̄^{(n)} - θ^{(n)}‖₂` within one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrace {
    pub phase: Phase,
    pub distances: Vec<f64>,
    /// Threshold at each step (the simultaneous threshold follows the
    /// running `ĉ`).
    pub thresholds: Vec<f64>,
    /// Index within the phase of the first `distance ≥ threshold`.
    pub first_crossing: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CouplingTrace {
    pub phases: Vec<PhaseTrace>,
}

impl CouplingTrace {
    pub fn crossed(&self) -> bool {
        self.phases.iter().any(|p| p.first_crossing.is_some())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticOutput {
    pub train: TrainOutput,
    pub coupling: Option<CouplingTrace>,
}

fn keep(n: u64, last: bool, every: u64) -> bool {
    last || n % every.max(1) == 0
}

/// `θ̄^{(n+1)} = θ̄^{(n)} + η ∇̂J^K(θ̄^{(n)})`. `J`, the optimal-action
/// probability and the suboptimality are logged from exact evaluation.
pub fn train_stochastic_simultaneous(
    mdp: &FiniteMdp,
    theta0: &ParamTensor,
    mu: &[f64],
    schedule: &StochasticEpoch,
    opts: &StochasticOptions,
    sink: Option<crate::trainers::Sink<'_>>,
) -> Result<StochasticOutput, TrainError> {
    if !theta0.matches(mdp) {
        return Err(TrainError::Shape);
    }
    mdp.check_distribution(0, mu)?;
    let StochasticEpoch { eta, n_steps, batch } = *schedule;
    let streams = Substreams::new(opts.seed);
    let oracle = SimultaneousOracle::new(mdp, mu);
    let mut sink = sink;
    let mut theta = theta0.clone();
    let mut exact = theta0.clone();
    let mut log = TrainLog::new(true);
    let mut trace = PhaseTrace {
        phase: Phase::All,
        distances: Vec::new(),
        thresholds: Vec::new(),
        first_crossing: None,
    };
    let mut c_exact = f64::INFINITY;
    let mut c_hat = f64::INFINITY;
    let mut n = 0u64;
    let early_stopped = loop {
        let policy = policy_of(&theta);
        let j = evaluate_policy(mdp, &policy).value(0, mu);
        let min_opt_prob = oracle.min_opt_prob(&policy);
        c_hat = c_hat.min(min_opt_prob);
        let last_step = n == n_steps;
        let grad = match opts.estimator {
            EstimatorKind::Reinforce => {
                estimate_grad_simultaneous(mdp, &theta, mu, batch, &streams, n, opts.exec)
            }
            EstimatorKind::Exact => eval_simultaneous(mdp, &theta, mu).grad,
        };
        if !grad.is_finite() || !j.is_finite() {
            return Err(TrainError::NonFinite { step: n });
        }
        let (coupling_dist, crossed) = if opts.coupling {
            let exact_eval = eval_simultaneous(mdp, &exact, mu);
            c_exact = c_exact.min(oracle.min_opt_prob(&exact_eval.policy));
            let dist = theta.distance(&exact);
            let threshold = c_exact / 4.0;
            if trace.first_crossing.is_none() && dist >= threshold {
                trace.first_crossing = Some(n);
            }
            trace.distances.push(dist);
            trace.thresholds.push(threshold);
            exact.add_scaled(&exact_eval.grad, eta);
            (Some(dist), Some(trace.first_crossing.is_some()))
        } else {
            (None, None)
        };
        let row = LogRow {
            grad_evals: n,
            phase: Phase::All,
            j,
            grad_norm: grad.norm(),
            min_opt_prob,
            pl_lhs: None,
            pl_rhs: None,
            subopt: oracle.optimal_value - j,
            batch_size: Some(batch as u64),
            coupling_dist,
            crossed,
        };
        if let Some(f) = sink.as_mut() {
            f(&StepView {
                row: &row,
                theta: &theta,
                grad: GradView::Full(&grad),
                phase_objective: j,
                pl_rhs_normalised: None,
            });
        }
        let stop = opts.early_stop.is_some_and(|e| row.subopt <= e);
        if keep(n, last_step || stop, opts.log_every) {
            log.push(row);
        }
        if last_step || stop {
            break stop;
        }
        theta.add_scaled(&grad, eta);
        n += 1;
    };
    Ok(StochasticOutput {
        train: TrainOutput {
            theta,
            log,
            grad_evals: n,
            early_stopped,
            c_hat,
        },
        coupling: opts.coupling.then(|| CouplingTrace {
            phases: vec![trace],
        }),
    })
}

/// Backward sweep of batched REINFORCE ascent on each `θ_h` against the
/// already trained later epochs. With coupling, each phase also runs exact
/// ascent on `θ_h` from the same start against the same frozen later
/// policy; the threshold is `c_h/4` with `c_h = 1/|𝒜|`.
pub fn train_stochastic_dynamic(
    mdp: &FiniteMdp,
    theta0: &ParamTensor,
    mu_list: &[Vec<f64>],
    schedule: &[StochasticEpoch],
    opts: &StochasticOptions,
    sink: Option<crate::trainers::Sink<'_>>,
) -> Result<StochasticOutput, TrainError> {
    let horizon = mdp.horizon();
    if !theta0.matches(mdp) || mu_list.len() != horizon || schedule.len() != horizon {
        return Err(TrainError::Shape);
    }
    for (h, mu_h) in mu_list.iter().enumerate() {
        mdp.check_distribution(h, mu_h)?;
    }
    let start = mdp.start().to_vec();
    let optimal = backward_induction_optimal(mdp).0.value(0, &start);
    let threshold = 1.0 / (4.0 * mdp.max_actions() as f64);
    let streams = Substreams::new(opts.seed);
    let mut sink = sink;
    let mut theta = theta0.clone();
    let mut log = TrainLog::new(true);
    let mut traces = Vec::new();
    let mut c_hat = f64::INFINITY;
    let mut n = 0u64;
    let mut early_stopped = false;

    'phases: for h in (0..horizon).rev() {
        let StochasticEpoch { eta, n_steps, batch } = schedule[h];
        let mu_h = &mu_list[h];
        let tilde = policy_of(&theta);
        let oracle = DynamicOracle::new(epoch_q_values(mdp, &tilde, h), mu_h);
        let mut exact_block = theta.block(h).clone();
        let mut trace = PhaseTrace {
            phase: Phase::Epoch(h),
            distances: Vec::new(),
            thresholds: Vec::new(),
            first_crossing: None,
        };
        for k in 0..=n_steps {
            let pi_h = softmax_block(theta.block(h));
            let min_opt_prob = oracle.min_opt_prob(&pi_h);
            c_hat = c_hat.min(min_opt_prob);
            let phase_objective = objective_dynamic_from_q(&oracle.q_h, theta.block(h), mu_h);
            let grad = match opts.estimator {
                EstimatorKind::Reinforce => estimate_grad_dynamic(
                    mdp,
                    theta.block(h),
                    &tilde,
                    mu_h,
                    h,
                    batch,
                    &streams,
                    n,
                    opts.exec,
                ),
                EstimatorKind::Exact => grad_dynamic_from_q(&oracle.q_h, theta.block(h), mu_h),
            };
            if grad.iter().flatten().any(|g| !g.is_finite()) {
                return Err(TrainError::NonFinite { step: n });
            }
            let (coupling_dist, crossed) = if opts.coupling {
                let diff: Block = theta
                    .block(h)
                    .iter()
                    .zip(&exact_block)
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect())
                    .collect();
                let dist = block_norm(&diff);
                if trace.first_crossing.is_none() && dist >= threshold {
                    trace.first_crossing = Some(k);
                }
                trace.distances.push(dist);
                trace.thresholds.push(threshold);
                let exact_grad = grad_dynamic_from_q(&oracle.q_h, &exact_block, mu_h);
                add_scaled_block(&mut exact_block, &exact_grad, eta);
                (Some(dist), Some(trace.first_crossing.is_some()))
            } else {
                (None, None)
            };
            let j = evaluate_policy(mdp, &policy_of(&theta)).value(0, &start);
            let row = LogRow {
                grad_evals: n,
                phase: Phase::Epoch(h),
                j,
                grad_norm: block_norm(&grad),
                min_opt_prob,
                pl_lhs: None,
                pl_rhs: None,
                subopt: optimal - j,
                batch_size: Some(batch as u64),
                coupling_dist,
                crossed,
            };
            if let Some(f) = sink.as_mut() {
                f(&StepView {
                    row: &row,
                    theta: &theta,
                    grad: GradView::Epoch { h, grad: &grad },
                    phase_objective,
                    pl_rhs_normalised: None,
                });
            }
            let stop_phase = k == n_steps;
            if k > 0 || h + 1 == horizon {
                let stop = opts.early_stop.is_some_and(|e| row.subopt <= e);
                if keep(n, stop_phase || stop, opts.log_every) {
                    log.push(row);
                }
                if stop {
                    early_stopped = true;
                    traces.push(trace);
                    break 'phases;
                }
            }
            if stop_phase {
                break;
            }
            add_scaled_block(theta.block_mut(h), &grad, eta);
            n += 1;
        }
        traces.push(trace);
    }
    Ok(StochasticOutput {
        train: TrainOutput {
            theta,
            log,
            grad_evals: n,
            early_stopped,
            c_hat,
        },
        coupling: opts.coupling.then_some(CouplingTrace { phases: traces }),
    })
}

/// Which scheme a coupling run uses.
#[derive(Debug, Clone, PartialEq)]
pub enum CouplingScheme<'a> {
    Simultaneous { mu: &'a [f64] },
    Dynamic { mu_list: &'a [Vec<f64>] },
}

/// Runs the stochastic trainer with the exact iteration in lockstep from the
/// same `θ^{(0)}` and `η`, returning the per-phase distances and first
/// threshold crossings.
#[allow(clippy::too_many_arguments)]
pub fn coupling_trace(
    mdp: &FiniteMdp,
    theta0: &ParamTensor,
    scheme: &CouplingScheme<'_>,
    eta: f64,
    batch: usize,
    n_steps: u64,
    seed: u64,
    estimator: EstimatorKind,
) -> Result<CouplingTrace, TrainError> {
    let opts = StochasticOptions {
        seed,
        estimator,
        coupling: true,
        log_every: u64::MAX,
        ..StochasticOptions::default()
    };
    let epoch = StochasticEpoch {
        eta,
        n_steps,
        batch,
    };
    let out = match scheme {
        CouplingScheme::Simultaneous { mu } => {
            train_stochastic_simultaneous(mdp, theta0, mu, &epoch, &opts, None)?
        }
        CouplingScheme::Dynamic { mu_list } => {
            let schedule = vec![epoch; mdp.horizon()];
            train_stochastic_dynamic(mdp, theta0, mu_list, &schedule, &opts, None)?
        }
    };
    Ok(out.coupling.expect("coupling enabled"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{build_bandit2, build_dice};

    #[test]
    fn parallel_and_sequential_estimates_identical() {
        let mdp = build_dice(3);
        let theta = ParamTensor::zeros(&mdp);
        let s = Substreams::new(42);
        let a = estimate_grad_simultaneous(&mdp, &theta, mdp.start(), 5000, &s, 3, Execution::Sequential);
        let b = estimate_grad_simultaneous(&mdp, &theta, mdp.start(), 5000, &s, 3, Execution::Parallel);
        assert_eq!(a, b);
    }

    #[test]
    fn single_action_estimate_is_zero() {
        let mdp = FiniteMdp::new(
            vec![crate::mdp::Epoch::indexed(vec![vec![0.7]], vec![])],
            1.0,
        )
        .unwrap();
        let g = estimate_grad_simultaneous(
            &mdp,
            &ParamTensor::zeros(&mdp),
            &[1.0],
            100,
            &Substreams::new(0),
            0,
            Execution::Sequential,
        );
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn theorem_scale_is_astronomical() {
        let mdp = build_bandit2();
        let t = theorem_simultaneous(&mdp, &[1.0], 0.1, 0.1, 0.5, false).unwrap();
        assert!(t.total_trajectories() > 1e30);
        assert!(t.into_schedule(1e9).is_err());
        let d = theorem_dynamic(&mdp, &[vec![1.0]], 0.1, 0.1, &CConstant::UniformInit).unwrap();
        // N_0 = (12·1·1·1·1/(0.1·0.25·0.1))² = 4800².
        assert!((d.epochs[0].n_steps - 4800f64.powi(2)).abs() < 1e-3);
    }

    #[test]
    fn user_schedule_step_size() {
        let mdp = build_dice(3);
        let StochasticSchedule::Simultaneous(e) = StochasticSchedule::simultaneous(&mdp, 100, 8) else {
            unreachable!()
        };
        assert!((e.eta - 1.0 / (5.0 * 9.0 * 6.0 * 10.0)).abs() < 1e-18);
    }
}
