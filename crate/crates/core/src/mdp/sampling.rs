//! Trajectory sampling with reproducible, parallelism-independent streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::FiniteMdp;
use super::policy::TabularPolicy;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
}

/// A sampled path `(s_k, a_k, r_k)` for `k = start_epoch..H-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start_epoch: usize,
    pub steps: Vec<Step>,
    reward_to_go: Vec<f64>,
}

impl Trajectory {
    pub fn new(start_epoch: usize, steps: Vec<Step>) -> Self {
        let mut reward_to_go = vec![0.0; steps.len()];
        let mut acc = 0.0;
        for (i, step) in steps.iter().enumerate().rev() {
            acc += step.reward;
            reward_to_go[i] = acc;
        }
        Self {
            start_epoch,
            steps,
            reward_to_go,
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The step taken at absolute epoch `h`.
    pub fn at(&self, h: usize) -> &Step {
        &self.steps[h - self.start_epoch]
    }

    /// `R̂_h = Σ_{k ≥ h} r_k` at absolute epoch `h`.
    pub fn reward_to_go(&self, h: usize) -> f64 {
        self.reward_to_go[h - self.start_epoch]
    }
}

/// Draws an index from a probability vector by inversion.
pub fn sample_categorical<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
        }
        acc += p;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// Samples `S_{h0} ~ mu`, `A_k ~ π_k(·|S_k)`, `S_{k+1} ~ p(·|S_k, A_k)`.
pub fn sample_trajectory<R: Rng + ?Sized>(
    mdp: &FiniteMdp,
    policy: &TabularPolicy,
    mu: &[f64],
    start_epoch: usize,
    rng: &mut R,
) -> Trajectory {
    let horizon = mdp.horizon();
    let mut steps = Vec::with_capacity(horizon - start_epoch);
    let mut state = sample_categorical(mu, rng);
    for h in start_epoch..horizon {
        let action = sample_categorical(policy.row(h, state), rng);
        steps.push(Step {
            state,
            action,
            reward: mdp.reward(h, state, action),
        });
        if h + 1 < horizon {
            state = sample_categorical(mdp.transition(h, state, action), rng);
        }
    }
    Trajectory::new(start_epoch, steps)
}

/// Counter-based random streams keyed by `(master seed, step)` with one
/// independent stream per trajectory index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Substreams {
    master: u64,
}

impl Substreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn rng(&self, step: u64, index: u64) -> ChaCha8Rng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.master.to_le_bytes());
        seed[8..16].copy_from_slice(&step.to_le_bytes());
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(index);
        rng
    }
}
