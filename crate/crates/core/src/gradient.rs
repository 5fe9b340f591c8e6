//! Exact gradients of the simultaneous objective `J(θ, μ) = V_0^{π^θ}(μ)`
//! and the per-epoch objectives `J_h(θ_h) = V_h^{(π^{θ_h}, π̃)}(μ_h)`, with
//! the constants of the convergence analysis: distribution mismatch, weak PL
//! lower bounds and smoothness.

use thiserror::Error;

use crate::mdp::{
    argmax, backward_induction_optimal, dot, evaluate_policy, q_from_next, state_visitation,
    Block, FiniteMdp, TabularPolicy, ValueTables, VisitationMeasures,
};
use crate::softmax::{block_norm, policy_of, softmax_block, GradTensor, ParamTensor};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradientError {
    #[error("state space differs across epochs; the distribution mismatch coefficient is undefined")]
    NonConstantStateSpace,
    #[error("state {state:?} is visited by the comparison policy but never under the current policy")]
    ZeroVisitation { state: String },
}

/// Everything computed from one exact evaluation of `π^θ` under `μ`.
#[derive(Debug, Clone)]
pub struct SimultaneousEval {
    pub policy: TabularPolicy,
    pub tables: ValueTables,
    pub visitation: VisitationMeasures,
    pub grad: GradTensor,
    pub objective: f64,
}

/// Exact evaluation and gradient `∂J/∂θ(s_h, a) = ρ̃(s_h) π(a|s_h) A_h(s_h, a)`.
pub fn eval_simultaneous(mdp: &FiniteMdp, theta: &ParamTensor, mu: &[f64]) -> SimultaneousEval {
    let policy = policy_of(theta);
    let tables = evaluate_policy(mdp, &policy);
    let visitation = state_visitation(mdp, &policy, mu);
    let blocks = (0..mdp.horizon())
        .map(|h| {
            (0..mdp.num_states(h))
                .map(|s| {
                    let rho = visitation.rho[h][s];
                    policy
                        .row(h, s)
                        .iter()
                        .zip(&tables.adv[h][s])
                        .map(|(p, adv)| rho * p * adv)
                        .collect()
                })
                .collect()
        })
        .collect();
    let objective = tables.value(0, mu);
    SimultaneousEval {
        policy,
        tables,
        visitation,
        grad: ParamTensor::from_blocks(blocks),
        objective,
    }
}

pub fn grad_simultaneous(mdp: &FiniteMdp, theta: &ParamTensor, mu: &[f64]) -> GradTensor {
    eval_simultaneous(mdp, theta, mu).grad
}

/// `J(θ, μ) = Σ_s μ(s) V_0^{π^θ}(s)`.
pub fn objective_simultaneous(mdp: &FiniteMdp, theta: &ParamTensor, mu: &[f64]) -> f64 {
    evaluate_policy(mdp, &policy_of(theta)).value(0, mu)
}

/// `Q_h^{π̃}(s, a) = r(s, a) + Σ p(s'|s, a) V_{h+1}^{π̃}(s')`; only the rows of
/// `tilde_pi` after epoch `h` are read.
pub fn epoch_q_values(mdp: &FiniteMdp, tilde_pi: &TabularPolicy, h: usize) -> Block {
    let mut v_next: Option<Vec<f64>> = None;
    for k in (h + 1..mdp.horizon()).rev() {
        let qk = q_from_next(mdp, k, v_next.as_deref());
        v_next = Some(
            qk.iter()
                .enumerate()
                .map(|(s, row)| dot(tilde_pi.row(k, s), row))
                .collect(),
        );
    }
    q_from_next(mdp, h, v_next.as_deref())
}

/// Block gradient `μ_h(s) π(a|s) (Q_h(s, a) - Σ_b π(b|s) Q_h(s, b))` for a
/// fixed `Q_h`.
pub fn grad_dynamic_from_q(q_h: &Block, theta_h: &Block, mu_h: &[f64]) -> Block {
    theta_h
        .iter()
        .zip(q_h)
        .zip(mu_h)
        .map(|((row, q), m)| {
            let pi = crate::softmax::softmax_row(row);
            let v = dot(&pi, q);
            pi.iter().zip(q).map(|(p, qa)| m * p * (qa - v)).collect()
        })
        .collect()
}

/// `J_h = Σ_s μ_h(s) Σ_a π^{θ_h}(a|s) Q_h(s, a)` for a fixed `Q_h`.
pub fn objective_dynamic_from_q(q_h: &Block, theta_h: &Block, mu_h: &[f64]) -> f64 {
    softmax_block(theta_h)
        .iter()
        .zip(q_h)
        .zip(mu_h)
        .map(|((pi, q), m)| m * dot(pi, q))
        .sum()
}

pub fn grad_dynamic(
    mdp: &FiniteMdp,
    theta_h: &Block,
    tilde_pi: &TabularPolicy,
    mu_h: &[f64],
    h: usize,
) -> Block {
    grad_dynamic_from_q(&epoch_q_values(mdp, tilde_pi, h), theta_h, mu_h)
}

pub fn objective_dynamic(
    mdp: &FiniteMdp,
    theta_h: &Block,
    tilde_pi: &TabularPolicy,
    mu_h: &[f64],
    h: usize,
) -> f64 {
    objective_dynamic_from_q(&epoch_q_values(mdp, tilde_pi, h), theta_h, mu_h)
}

/// Distribution mismatch between two visitation distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mismatch {
    /// `max_s d^{π*}(s) / d^{π^θ}(s)`.
    pub coefficient: f64,
    /// `H · max_s d^{π*}(s) / μ(s)`, valid for every θ since `d ≥ μ/H`.
    pub uniform_bound: f64,
}

fn ratio_max(num: &[f64], den: &[f64], names: &[String]) -> Result<f64, GradientError> {
    let mut best: f64 = 0.0;
    for ((n, d), name) in num.iter().zip(den).zip(names) {
        if *n == 0.0 {
            continue;
        }
        if *d == 0.0 {
            return Err(GradientError::ZeroVisitation { state: name.clone() });
        }
        best = best.max(n / d);
    }
    Ok(best)
}

fn start_by_name(mdp: &FiniteMdp, mu: &[f64], names: &[String]) -> Vec<f64> {
    names
        .iter()
        .map(|n| mdp.state_index(0, n).map_or(0.0, |i| mu[i]))
        .collect()
}

fn mismatch_from(
    mdp: &FiniteMdp,
    mu: &[f64],
    d_star: &VisitationMeasures,
    d_theta: &VisitationMeasures,
) -> Result<Mismatch, GradientError> {
    if !mdp.has_constant_state_space() {
        return Err(GradientError::NonConstantStateSpace);
    }
    let coefficient = ratio_max(&d_star.d, &d_theta.d, &d_star.states)?;
    let mu_named = start_by_name(mdp, mu, &d_star.states);
    let uniform_bound = match ratio_max(&d_star.d, &mu_named, &d_star.states) {
        Ok(r) => r * mdp.horizon() as f64,
        Err(_) => f64::INFINITY,
    };
    Ok(Mismatch {
        coefficient,
        uniform_bound,
    })
}

pub fn distribution_mismatch(
    mdp: &FiniteMdp,
    mu: &[f64],
    pi_star: &TabularPolicy,
    pi_theta: &TabularPolicy,
) -> Result<Mismatch, GradientError> {
    let d_star = state_visitation(mdp, pi_star, mu);
    let d_theta = state_visitation(mdp, pi_theta, mu);
    mismatch_from(mdp, mu, &d_star, &d_theta)
}

/// Quantities of a weak PL inequality at one parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlCertificate {
    /// Gradient norm.
    pub lhs: f64,
    /// PL lower bound on the gradient norm; absent when the mismatch
    /// coefficient is not applicable.
    pub rhs: Option<f64>,
    pub suboptimality: f64,
    pub min_opt_prob: f64,
    /// Simultaneous scheme only.
    pub mismatch: Option<f64>,
    /// Dynamic scheme only: `rhs / √|S_h|`, the bound obtained when the
    /// Euclidean norm is compared with the per-state sum by Cauchy-Schwarz.
    pub rhs_normalised: Option<f64>,
}

impl PlCertificate {
    pub fn holds(&self, tol: f64) -> bool {
        self.rhs.is_none_or(|rhs| self.lhs >= rhs - tol)
    }

    pub fn normalised_holds(&self, tol: f64) -> bool {
        self.rhs_normalised.is_none_or(|rhs| self.lhs >= rhs - tol)
    }
}

/// The optimal-control side of the simultaneous certificate, computed once
/// per (model, μ).
#[derive(Debug, Clone)]
pub struct SimultaneousOracle {
    pub optimal_value: f64,
    pub optimal_tables: ValueTables,
    pub pi_star: TabularPolicy,
    pub optimal_actions: Vec<Vec<usize>>,
    d_star: VisitationMeasures,
}

impl SimultaneousOracle {
    pub fn new(mdp: &FiniteMdp, mu: &[f64]) -> Self {
        let (tables, pi_star) = backward_induction_optimal(mdp);
        Self::with_policy(mdp, mu, tables, pi_star)
    }

    fn with_policy(
        mdp: &FiniteMdp,
        mu: &[f64],
        optimal_tables: ValueTables,
        pi_star: TabularPolicy,
    ) -> Self {
        let d_star = state_visitation(mdp, &pi_star, mu);
        Self {
            optimal_value: optimal_tables.value(0, mu),
            optimal_actions: pi_star.greedy_actions(),
            optimal_tables,
            pi_star,
            d_star,
        }
    }

    pub fn min_opt_prob(&self, policy: &TabularPolicy) -> f64 {
        self.optimal_actions
            .iter()
            .enumerate()
            .flat_map(|(h, acts)| acts.iter().enumerate().map(move |(s, &a)| policy.prob(h, s, a)))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn certificate(&self, mdp: &FiniteMdp, mu: &[f64], eval: &SimultaneousEval) -> PlCertificate {
        let min_opt_prob = self.min_opt_prob(&eval.policy);
        let suboptimality = self.optimal_value - eval.objective;
        let mismatch = mismatch_from(mdp, mu, &self.d_star, &eval.visitation)
            .ok()
            .map(|m| m.coefficient);
        let scale = (mdp.enlarged_size() as f64).sqrt();
        PlCertificate {
            lhs: eval.grad.norm(),
            rhs: mismatch.map(|m| min_opt_prob / scale / m * suboptimality),
            suboptimality,
            min_opt_prob,
            mismatch,
            rhs_normalised: None,
        }
    }
}

/// `‖∇J‖ ≥ min π(a*|s_h)/√|𝒮^[ℋ]| · ‖d*/d^θ‖_∞⁻¹ · (J* - J)` with `π*` the
/// backward-induction optimal policy.
pub fn pl_certificate_simultaneous(
    mdp: &FiniteMdp,
    theta: &ParamTensor,
    mu: &[f64],
    pi_star: &TabularPolicy,
) -> PlCertificate {
    let tables = evaluate_policy(mdp, pi_star);
    let oracle = SimultaneousOracle::with_policy(mdp, mu, tables, pi_star.clone());
    oracle.certificate(mdp, mu, &eval_simultaneous(mdp, theta, mu))
}

/// The optimal-control side of one dynamic phase: `Q_h^{π̃}`, its greedy
/// actions and `J_h*`.
#[derive(Debug, Clone)]
pub struct DynamicOracle {
    pub q_h: Block,
    pub optimal_actions: Vec<usize>,
    pub optimal_value: f64,
}

impl DynamicOracle {
    pub fn new(q_h: Block, mu_h: &[f64]) -> Self {
        let optimal_actions: Vec<usize> = q_h.iter().map(|row| argmax(row)).collect();
        let optimal_value = q_h
            .iter()
            .zip(&optimal_actions)
            .zip(mu_h)
            .map(|((row, &a), m)| m * row[a])
            .sum();
        Self {
            q_h,
            optimal_actions,
            optimal_value,
        }
    }

    pub fn min_opt_prob(&self, pi_h: &Block) -> f64 {
        pi_h.iter()
            .zip(&self.optimal_actions)
            .map(|(row, &a)| row[a])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn certificate(&self, pi_h: &Block, grad_h: &Block, objective: f64) -> PlCertificate {
        let min_opt_prob = self.min_opt_prob(pi_h);
        let suboptimality = self.optimal_value - objective;
        let rhs = min_opt_prob * suboptimality;
        PlCertificate {
            lhs: block_norm(grad_h),
            rhs: Some(rhs),
            suboptimality,
            min_opt_prob,
            mismatch: None,
            rhs_normalised: Some(rhs / (pi_h.len() as f64).sqrt()),
        }
    }
}

/// `‖∇J_h‖ ≥ min_s π^{θ_h}(a_h*(s)|s) (J_h* - J_h)` with `a_h*` greedy for
/// `Q_h^{π̃}`.
pub fn pl_certificate_dynamic(
    mdp: &FiniteMdp,
    theta_h: &Block,
    tilde_pi: &TabularPolicy,
    mu_h: &[f64],
    h: usize,
) -> PlCertificate {
    let oracle = DynamicOracle::new(epoch_q_values(mdp, tilde_pi, h), mu_h);
    let grad = grad_dynamic_from_q(&oracle.q_h, theta_h, mu_h);
    let objective = objective_dynamic_from_q(&oracle.q_h, theta_h, mu_h);
    oracle.certificate(&softmax_block(theta_h), &grad, objective)
}

/// `β = H² R* (2 - 1/|𝒜|)`.
pub fn smoothness_simultaneous(mdp: &FiniteMdp) -> f64 {
    let h = mdp.horizon() as f64;
    h * h * mdp.r_star() * (2.0 - 1.0 / mdp.max_actions() as f64)
}

/// `β_h = 2 (H - h) R*`.
pub fn smoothness_dynamic(mdp: &FiniteMdp, h: usize) -> f64 {
    2.0 * (mdp.horizon() - h) as f64 * mdp.r_star()
}

#[derive(Debug, Clone)]
pub enum Scheme<'a> {
    Simultaneous {
        mu: &'a [f64],
    },
    Dynamic {
        h: usize,
        tilde_pi: &'a TabularPolicy,
        mu_h: &'a [f64],
    },
}

/// `(‖∇J(θ_a) - ∇J(θ_b)‖, β ‖θ_a - θ_b‖)`; the dynamic scheme reads block
/// `h` of both parameters only.
pub fn smoothness_witness(
    mdp: &FiniteMdp,
    theta_a: &ParamTensor,
    theta_b: &ParamTensor,
    scheme: &Scheme<'_>,
) -> (f64, f64) {
    match scheme {
        Scheme::Simultaneous { mu } => {
            let ga = grad_simultaneous(mdp, theta_a, mu);
            let gb = grad_simultaneous(mdp, theta_b, mu);
            (
                ga.distance(&gb),
                smoothness_simultaneous(mdp) * theta_a.distance(theta_b),
            )
        }
        Scheme::Dynamic { h, tilde_pi, mu_h } => {
            let q = epoch_q_values(mdp, tilde_pi, *h);
            let ga = grad_dynamic_from_q(&q, theta_a.block(*h), mu_h);
            let gb = grad_dynamic_from_q(&q, theta_b.block(*h), mu_h);
            let gap = ParamTensor::from_blocks(vec![ga]).distance(&ParamTensor::from_blocks(vec![gb]));
            let dist = ParamTensor::from_blocks(vec![theta_a.block(*h).clone()])
                .distance(&ParamTensor::from_blocks(vec![theta_b.block(*h).clone()]));
            (gap, smoothness_dynamic(mdp, *h) * dist)
        }
    }
}
