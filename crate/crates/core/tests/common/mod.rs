#![allow(dead_code)]

use finmdp_core::bench::{random_mdp, RandomMdpSpec};
use finmdp_core::mdp::{Epoch, FiniteMdp, TabularPolicy};
use finmdp_core::softmax::ParamTensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_theta<R: Rng>(mdp: &FiniteMdp, scale: f64, rng: &mut R) -> ParamTensor {
    let mut theta = ParamTensor::zeros(mdp);
    for h in 0..mdp.horizon() {
        for row in theta.block_mut(h) {
            for x in row {
                *x = scale * (2.0 * rng.random::<f64>() - 1.0);
            }
        }
    }
    theta
}

/// Random small model: `H ≤ 4`, `|S_h| ≤ 4`, `|A_s| ≤ 3`.
pub fn small_mdp<R: Rng>(rng: &mut R, constant_states: bool) -> FiniteMdp {
    let spec = RandomMdpSpec {
        horizon: rng.random_range(1..=4),
        max_states: 4,
        max_actions: 3,
        constant_states,
        r_star: 1.0 + 4.0 * rng.random::<f64>(),
    };
    random_mdp(&spec, rng)
}

/// Central difference of `f` along every coordinate of `theta`.
pub fn finite_difference(theta: &ParamTensor, step: f64, f: impl Fn(&ParamTensor) -> f64) -> ParamTensor {
    let mut out = theta.zeros_like();
    let mut probe = theta.clone();
    for h in 0..theta.horizon() {
        for s in 0..theta.block(h).len() {
            for a in 0..theta.block(h)[s].len() {
                let x = theta.get(h, s, a);
                probe.set(h, s, a, x + step);
                let up = f(&probe);
                probe.set(h, s, a, x - step);
                let down = f(&probe);
                probe.set(h, s, a, x);
                out.set(h, s, a, (up - down) / (2.0 * step));
            }
        }
    }
    out
}

pub fn max_abs_diff(a: &ParamTensor, b: &ParamTensor) -> f64 {
    a.values().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn random_policy<R: Rng>(mdp: &FiniteMdp, rng: &mut R) -> TabularPolicy {
    let probs = (0..mdp.horizon())
        .map(|h| {
            (0..mdp.num_states(h))
                .map(|s| {
                    let w: Vec<f64> = (0..mdp.num_actions(h, s)).map(|_| rng.random::<f64>() + 1e-3).collect();
                    let total: f64 = w.iter().sum();
                    w.into_iter().map(|x| x / total).collect()
                })
                .collect()
        })
        .collect();
    TabularPolicy::new(mdp, probs).expect("normalised rows")
}

/// Same layout and transitions as `mdp` with every reward set to zero.
pub fn zero_rewards(mdp: &FiniteMdp) -> FiniteMdp {
    let epochs = (0..mdp.horizon())
        .map(|h| {
            let rewards: Vec<Vec<f64>> = (0..mdp.num_states(h))
                .map(|s| vec![0.0; mdp.num_actions(h, s)])
                .collect();
            let transitions = if h + 1 < mdp.horizon() {
                (0..mdp.num_states(h))
                    .map(|s| (0..mdp.num_actions(h, s)).map(|a| mdp.transition(h, s, a).to_vec()).collect())
                    .collect()
            } else {
                Vec::new()
            };
            Epoch::indexed(rewards, transitions)
        })
        .collect();
    FiniteMdp::with_start(epochs, mdp.r_star(), mdp.start().to_vec()).expect("valid")
}

/// Expected total reward from `(h, s)` by summing over every path.
pub fn path_value(mdp: &FiniteMdp, policy: &TabularPolicy, h: usize, s: usize) -> f64 {
    let mut total = 0.0;
    for a in 0..mdp.num_actions(h, s) {
        let p = policy.prob(h, s, a);
        if p == 0.0 {
            continue;
        }
        let mut ret = mdp.reward(h, s, a);
        if h + 1 < mdp.horizon() {
            for (t, &q) in mdp.transition(h, s, a).iter().enumerate() {
                if q > 0.0 {
                    ret += q * path_value(mdp, policy, h + 1, t);
                }
            }
        }
        total += p * ret;
    }
    total
}
