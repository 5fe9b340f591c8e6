//! Exact policy evaluation by backward recursion, the optimal-control oracle,
//! and forward visitation measures.

use super::model::FiniteMdp;
use super::policy::{argmax, Block, TabularPolicy};

/// `V_h`, `Q_h` and `A_h = Q_h - V_h` for every epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTables {
    pub v: Vec<Vec<f64>>,
    pub q: Vec<Block>,
    pub adv: Vec<Block>,
}

impl ValueTables {
    /// `Σ_s μ(s) V_h(s)`.
    pub fn value(&self, h: usize, mu: &[f64]) -> f64 {
        dot(&self.v[h], mu)
    }
}

/// Enlarged-state visitation `ρ̃(s_h) = P(S_h = s_h)` together with the
/// normalised distribution `d` over underlying state names.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitationMeasures {
    pub rho: Vec<Vec<f64>>,
    pub states: Vec<String>,
    pub d: Vec<f64>,
}

impl VisitationMeasures {
    pub fn total_mass(&self) -> f64 {
        self.rho.iter().flatten().sum()
    }

    pub fn d_of(&self, name: &str) -> Option<f64> {
        self.states.iter().position(|s| s == name).map(|i| self.d[i])
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `r(s, a) + Σ_{s'} p(s'|s, a) V_{h+1}(s')` for every (s, a) of epoch `h`.
pub(crate) fn q_from_next(mdp: &FiniteMdp, h: usize, v_next: Option<&[f64]>) -> Block {
    (0..mdp.num_states(h))
        .map(|s| {
            (0..mdp.num_actions(h, s))
                .map(|a| {
                    let cont = v_next.map_or(0.0, |v| dot(mdp.transition(h, s, a), v));
                    mdp.reward(h, s, a) + cont
                })
                .collect()
        })
        .collect()
}

/// Value tables of `policy` via `V_H ≡ 0`, `Q_h = r + p·V_{h+1}`,
/// `V_h = Σ_a π Q_h`.
pub fn evaluate_policy(mdp: &FiniteMdp, policy: &TabularPolicy) -> ValueTables {
    let horizon = mdp.horizon();
    let mut v = vec![Vec::new(); horizon];
    let mut q = vec![Vec::new(); horizon];
    let mut adv = vec![Vec::new(); horizon];
    for h in (0..horizon).rev() {
        let qh = q_from_next(mdp, h, v.get(h + 1).map(Vec::as_slice));
        let vh: Vec<f64> = qh
            .iter()
            .enumerate()
            .map(|(s, row)| dot(policy.row(h, s), row))
            .collect();
        adv[h] = qh
            .iter()
            .zip(&vh)
            .map(|(row, vs)| row.iter().map(|x| x - vs).collect())
            .collect();
        v[h] = vh;
        q[h] = qh;
    }
    ValueTables { v, q, adv }
}

/// Optimal value tables and a deterministic optimal policy by backward
/// induction; ties go to the smallest action index.
pub fn backward_induction_optimal(mdp: &FiniteMdp) -> (ValueTables, TabularPolicy) {
    let horizon = mdp.horizon();
    let mut v = vec![Vec::new(); horizon];
    let mut q = vec![Vec::new(); horizon];
    let mut adv = vec![Vec::new(); horizon];
    let mut choice = vec![Vec::new(); horizon];
    for h in (0..horizon).rev() {
        let qh = q_from_next(mdp, h, v.get(h + 1).map(Vec::as_slice));
        choice[h] = qh.iter().map(|row| argmax(row)).collect();
        let vh: Vec<f64> = qh.iter().zip(&choice[h]).map(|(row, &a)| row[a]).collect();
        adv[h] = qh
            .iter()
            .zip(&vh)
            .map(|(row, vs)| row.iter().map(|x| x - vs).collect())
            .collect();
        v[h] = vh;
        q[h] = qh;
    }
    let policy = TabularPolicy::deterministic(mdp, &choice);
    (ValueTables { v, q, adv }, policy)
}

/// Forward recursion of `P(S_k = s)` for `k ≥ start_epoch` when
/// `S_{start_epoch} ~ mu`; rows before `start_epoch` are zero.
pub fn visitation_from(
    mdp: &FiniteMdp,
    policy: &TabularPolicy,
    start_epoch: usize,
    mu: &[f64],
) -> Vec<Vec<f64>> {
    let horizon = mdp.horizon();
    let mut rho: Vec<Vec<f64>> = (0..horizon).map(|h| vec![0.0; mdp.num_states(h)]).collect();
    rho[start_epoch].copy_from_slice(mu);
    for h in start_epoch..horizon.saturating_sub(1) {
        let (cur, next) = rho.split_at_mut(h + 1);
        let cur = &cur[h];
        let next = &mut next[0];
        for (s, &mass) in cur.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (a, &pa) in policy.row(h, s).iter().enumerate() {
                let w = mass * pa;
                if w == 0.0 {
                    continue;
                }
                for (t, &p) in mdp.transition(h, s, a).iter().enumerate() {
                    next[t] += w * p;
                }
            }
        }
    }
    rho
}

/// Visitation measures from the first epoch under start distribution `mu`.
pub fn state_visitation(mdp: &FiniteMdp, policy: &TabularPolicy, mu: &[f64]) -> VisitationMeasures {
    let rho = visitation_from(mdp, policy, 0, mu);
    let states = mdp.underlying_states();
    let horizon = mdp.horizon() as f64;
    let mut d = vec![0.0; states.len()];
    for (h, row) in rho.iter().enumerate() {
        for (s, mass) in row.iter().enumerate() {
            let name = mdp.state_name(h, s);
            let i = states.iter().position(|n| n == name).expect("state listed");
            d[i] += mass;
        }
    }
    d.iter_mut().for_each(|x| *x /= horizon);
    VisitationMeasures { rho, states, d }
}

/// Both sides of the performance difference identity at `(h, s)`:
/// `V_h^π(s) - V_h^{π'}(s)` and `Σ_{k≥h} E^π_{S_h=s}[A_k^{π'}(S_k, A_k)]`.
pub fn performance_difference(
    mdp: &FiniteMdp,
    pi: &TabularPolicy,
    pi_prime: &TabularPolicy,
    h: usize,
    s: usize,
) -> (f64, f64) {
    let tables = evaluate_policy(mdp, pi);
    let tables_prime = evaluate_policy(mdp, pi_prime);
    let lhs = tables.v[h][s] - tables_prime.v[h][s];

    let mut delta = vec![0.0; mdp.num_states(h)];
    delta[s] = 1.0;
    let rho = visitation_from(mdp, pi, h, &delta);
    let mut rhs = 0.0;
    for k in h..mdp.horizon() {
        for (t, mass) in rho[k].iter().enumerate() {
            rhs += mass * dot(pi.row(k, t), &tables_prime.adv[k][t]);
        }
    }
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mdp::Epoch;

    fn chain() -> FiniteMdp {
        // s0 --(a0: 0.3 / 0.7)--> {t0, t1}; a1 pays 1 and goes to t1.
        let e0 = Epoch::indexed(
            vec![vec![0.0, 1.0]],
            vec![vec![vec![0.3, 0.7], vec![0.0, 1.0]]],
        );
        let e1 = Epoch::indexed(vec![vec![2.0], vec![0.5]], vec![]);
        FiniteMdp::new(vec![e0, e1], 2.0).unwrap()
    }

    #[test]
    fn hand_computed_values() {
        let mdp = chain();
        let t = evaluate_policy(&mdp, &TabularPolicy::uniform(&mdp));
        // Q_0(a0) = 0.3*2 + 0.7*0.5 = 0.95, Q_0(a1) = 1 + 0.5 = 1.5
        assert!((t.q[0][0][0] - 0.95).abs() < 1e-15);
        assert!((t.q[0][0][1] - 1.5).abs() < 1e-15);
        assert!((t.v[0][0] - 1.225).abs() < 1e-15);
        assert_eq!(t.q[1][0][0], 2.0);
        let (opt, pi) = backward_induction_optimal(&mdp);
        assert_eq!(opt.v[0][0], 1.5);
        assert_eq!(pi.row(0, 0), &[0.0, 1.0]);
    }

    #[test]
    fn visitation_mass_is_horizon() {
        let mdp = chain();
        let vis = state_visitation(&mdp, &TabularPolicy::uniform(&mdp), mdp.start());
        assert!((vis.total_mass() - 2.0).abs() < 1e-12);
        assert!((vis.rho[1][0] - 0.15).abs() < 1e-15);
        assert!((vis.d.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn performance_difference_identical_policies() {
        let mdp = chain();
        let pi = TabularPolicy::uniform(&mdp);
        let (lhs, rhs) = performance_difference(&mdp, &pi, &pi, 0, 0);
        assert_eq!(lhs, 0.0);
        assert!(rhs.abs() < 1e-15);
    }
}
