use std::collections::HashSet;

use thiserror::Error;

/// Tolerance on input probability vectors (transition rows, start
/// distributions, policy rows).
pub const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdpError {
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("declared horizon {declared} does not match {found} epochs")]
    HorizonMismatch { declared: usize, found: usize },
    #[error("reward bound r_star must be positive and finite, got {0}")]
    InvalidRewardBound(f64),
    #[error("epoch {epoch} has no states")]
    NoStates { epoch: usize },
    #[error("duplicate state {state:?} in epoch {epoch}")]
    DuplicateState { epoch: usize, state: String },
    #[error("duplicate action {action:?} at (h={epoch}, s={state})")]
    DuplicateAction {
        epoch: usize,
        state: String,
        action: String,
    },
    #[error("no actions at (h={epoch}, s={state})")]
    NoActions { epoch: usize, state: String },
    #[error("shape mismatch at epoch {epoch}: {what}")]
    Shape { epoch: usize, what: String },
    #[error("reward out of bounds at (h={epoch}, s={state}, a={action}): {value} not in [0, {r_star}]")]
    RewardOutOfBounds {
        epoch: usize,
        state: String,
        action: String,
        value: f64,
        r_star: f64,
    },
    #[error("transition not stochastic at (h={epoch}, s={state}, a={action}): row sums to {sum}")]
    NotStochastic {
        epoch: usize,
        state: String,
        action: String,
        sum: f64,
    },
    #[error("negative or non-finite transition probability at (h={epoch}, s={state}, a={action}) towards {target}")]
    InvalidProbability {
        epoch: usize,
        state: String,
        action: String,
        target: String,
    },
    #[error("transition target {target:?} at (h={epoch}, s={state}, a={action}) is not a state of epoch {next}", next = epoch + 1)]
    UnknownTarget {
        epoch: usize,
        state: String,
        action: String,
        target: String,
    },
    #[error("unknown state {state:?} in epoch {epoch}")]
    UnknownState { epoch: usize, state: String },
    #[error("unknown action {action:?} at (h={epoch}, s={state})")]
    UnknownAction {
        epoch: usize,
        state: String,
        action: String,
    },
    #[error("last epoch must not define transitions (state {state})")]
    TerminalTransitions { state: String },
    #[error("distribution over epoch {epoch} is invalid: {what}")]
    InvalidDistribution { epoch: usize, what: String },
    #[error("policy row at (h={epoch}, s={state}) is not a probability vector")]
    InvalidPolicy { epoch: usize, state: String },
}

/// One decision epoch: its states, per-state actions, rewards, and the
/// transition kernel into the next epoch's states.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch {
    pub(crate) states: Vec<String>,
    pub(crate) actions: Vec<Vec<String>>,
    /// `rewards[s][a]`
    pub(crate) rewards: Vec<Vec<f64>>,
    /// `transitions[s][a][s']`, dense over the next epoch's states. Empty on
    /// the last epoch.
    pub(crate) transitions: Vec<Vec<Vec<f64>>>,
}

impl Epoch {
    pub fn new(
        states: Vec<String>,
        actions: Vec<Vec<String>>,
        rewards: Vec<Vec<f64>>,
        transitions: Vec<Vec<Vec<f64>>>,
    ) -> Self {
        Self {
            states,
            actions,
            rewards,
            transitions,
        }
    }

    /// Epoch with generated names `s0, s1, ...` and `a0, a1, ...`.
    pub fn indexed(rewards: Vec<Vec<f64>>, transitions: Vec<Vec<Vec<f64>>>) -> Self {
        let states = (0..rewards.len()).map(|s| format!("s{s}")).collect();
        let actions = rewards
            .iter()
            .map(|row| (0..row.len()).map(|a| format!("a{a}")).collect())
            .collect();
        Self::new(states, actions, rewards, transitions)
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn actions(&self, s: usize) -> &[String] {
        &self.actions[s]
    }
}

/// A finite-time-horizon MDP with epoch-tagged state spaces.
///
/// States are identified by name inside an epoch and by dense index
/// everywhere else; the same name in two epochs denotes the same underlying
/// state (used for the aggregated visitation distribution).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    epochs: Vec<Epoch>,
    r_star: f64,
    start: Vec<f64>,
}

impl FiniteMdp {
    /// Builds and validates a model whose start distribution is uniform on the
    /// first epoch.
    pub fn new(epochs: Vec<Epoch>, r_star: f64) -> Result<Self, MdpError> {
        let n0 = epochs.first().map_or(0, Epoch::num_states);
        let start = vec![1.0 / n0.max(1) as f64; n0];
        Self::with_start(epochs, r_star, start)
    }

    pub fn with_start(epochs: Vec<Epoch>, r_star: f64, start: Vec<f64>) -> Result<Self, MdpError> {
        let mdp = Self {
            epochs,
            r_star,
            start,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    /// Checks every structural and numerical invariant, reporting the first
    /// violation with its location.
    pub fn validate(&self) -> Result<(), MdpError> {
        if self.epochs.is_empty() {
            return Err(MdpError::EmptyHorizon);
        }
        if !(self.r_star.is_finite() && self.r_star > 0.0) {
            return Err(MdpError::InvalidRewardBound(self.r_star));
        }
        let horizon = self.epochs.len();
        for (h, epoch) in self.epochs.iter().enumerate() {
            self.validate_epoch(h, epoch, horizon)?;
        }
        check_distribution(0, &self.start, self.epochs[0].num_states())
    }

    fn validate_epoch(&self, h: usize, epoch: &Epoch, horizon: usize) -> Result<(), MdpError> {
        if epoch.states.is_empty() {
            return Err(MdpError::NoStates { epoch: h });
        }
        let mut seen = HashSet::new();
        for name in &epoch.states {
            if !seen.insert(name.as_str()) {
                return Err(MdpError::DuplicateState {
                    epoch: h,
                    state: name.clone(),
                });
            }
        }
        let n = epoch.states.len();
        if epoch.actions.len() != n || epoch.rewards.len() != n {
            return Err(MdpError::Shape {
                epoch: h,
                what: format!(
                    "{} states, {} action lists, {} reward rows",
                    n,
                    epoch.actions.len(),
                    epoch.rewards.len()
                ),
            });
        }
        let last = h + 1 == horizon;
        let next_n = if last {
            0
        } else {
            self.epochs[h + 1].num_states()
        };
        if last {
            if let Some(s) = epoch
                .transitions
                .iter()
                .position(|row| row.iter().any(|p| !p.is_empty()))
            {
                return Err(MdpError::TerminalTransitions {
                    state: epoch.states[s].clone(),
                });
            }
        } else if epoch.transitions.len() != n {
            return Err(MdpError::Shape {
                epoch: h,
                what: format!("{} transition rows for {} states", epoch.transitions.len(), n),
            });
        }

        for s in 0..n {
            let state = &epoch.states[s];
            let actions = &epoch.actions[s];
            if actions.is_empty() {
                return Err(MdpError::NoActions {
                    epoch: h,
                    state: state.clone(),
                });
            }
            let mut seen = HashSet::new();
            for a in actions {
                if !seen.insert(a.as_str()) {
                    return Err(MdpError::DuplicateAction {
                        epoch: h,
                        state: state.clone(),
                        action: a.clone(),
                    });
                }
            }
            if epoch.rewards[s].len() != actions.len() {
                return Err(MdpError::Shape {
                    epoch: h,
                    what: format!("reward row of state {state} has wrong length"),
                });
            }
            for (a, &r) in epoch.rewards[s].iter().enumerate() {
                if !(r.is_finite() && (0.0..=self.r_star).contains(&r)) {
                    return Err(MdpError::RewardOutOfBounds {
                        epoch: h,
                        state: state.clone(),
                        action: actions[a].clone(),
                        value: r,
                        r_star: self.r_star,
                    });
                }
            }
            if last {
                continue;
            }
            if epoch.transitions[s].len() != actions.len() {
                return Err(MdpError::Shape {
                    epoch: h,
                    what: format!("transition rows of state {state} do not match its actions"),
                });
            }
            for (a, row) in epoch.transitions[s].iter().enumerate() {
                if row.len() != next_n {
                    return Err(MdpError::Shape {
                        epoch: h,
                        what: format!(
                            "transition row at ({state}, {}) has length {}, expected {}",
                            actions[a],
                            row.len(),
                            next_n
                        ),
                    });
                }
                if let Some(t) = row.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
                    return Err(MdpError::InvalidProbability {
                        epoch: h,
                        state: state.clone(),
                        action: actions[a].clone(),
                        target: self.epochs[h + 1].states[t].clone(),
                    });
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(MdpError::NotStochastic {
                        epoch: h,
                        state: state.clone(),
                        action: actions[a].clone(),
                        sum,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.epochs.len()
    }

    pub fn r_star(&self) -> f64 {
        self.r_star
    }

    pub fn epochs(&self) -> &[Epoch] {
        &self.epochs
    }

    pub fn epoch(&self, h: usize) -> &Epoch {
        &self.epochs[h]
    }

    pub fn num_states(&self, h: usize) -> usize {
        self.epochs[h].states.len()
    }

    pub fn num_actions(&self, h: usize, s: usize) -> usize {
        self.epochs[h].actions[s].len()
    }

    pub fn reward(&self, h: usize, s: usize, a: usize) -> f64 {
        self.epochs[h].rewards[s][a]
    }

    /// Distribution over the states of epoch `h + 1`; empty on the last epoch.
    pub fn transition(&self, h: usize, s: usize, a: usize) -> &[f64] {
        self.epochs[h]
            .transitions
            .get(s)
            .and_then(|row| row.get(a))
            .map_or(&[], Vec::as_slice)
    }

    pub fn state_name(&self, h: usize, s: usize) -> &str {
        &self.epochs[h].states[s]
    }

    pub fn state_index(&self, h: usize, name: &str) -> Option<usize> {
        self.epochs[h].states.iter().position(|n| n == name)
    }

    pub fn action_index(&self, h: usize, s: usize, name: &str) -> Option<usize> {
        self.epochs[h].actions[s].iter().position(|n| n == name)
    }

    /// Declared start distribution on the first epoch.
    pub fn start(&self) -> &[f64] {
        &self.start
    }

    /// `|𝒜|`: the largest action set over all epochs and states.
    pub fn max_actions(&self) -> usize {
        self.epochs
            .iter()
            .flat_map(|e| e.actions.iter().map(Vec::len))
            .max()
            .unwrap_or(1)
    }

    /// Largest action set within epoch `h`.
    pub fn max_actions_at(&self, h: usize) -> usize {
        self.epochs[h].actions.iter().map(Vec::len).max().unwrap_or(1)
    }

    /// Size of the enlarged (epoch-tagged) state space.
    pub fn enlarged_size(&self) -> usize {
        self.epochs.iter().map(Epoch::num_states).sum()
    }

    /// Number of parameters in epoch `h` (`d_h`).
    pub fn epoch_dim(&self, h: usize) -> usize {
        self.epochs[h].actions.iter().map(Vec::len).sum()
    }

    /// True when every epoch carries the same set of state names.
    pub fn has_constant_state_space(&self) -> bool {
        let first: HashSet<&str> = self.epochs[0].states.iter().map(String::as_str).collect();
        self.epochs.iter().all(|e| {
            e.states.len() == first.len() && e.states.iter().all(|s| first.contains(s.as_str()))
        })
    }

    /// Distinct underlying state names, in order of first appearance.
    pub fn underlying_states(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for epoch in &self.epochs {
            for s in &epoch.states {
                if seen.insert(s.as_str()) {
                    out.push(s.clone());
                }
            }
        }
        out
    }

    /// Uniform distribution over the states of epoch `h`.
    pub fn uniform_distribution(&self, h: usize) -> Vec<f64> {
        let n = self.num_states(h);
        vec![1.0 / n as f64; n]
    }

    /// Validates `mu` as a probability vector over the states of epoch `h`.
    pub fn check_distribution(&self, h: usize, mu: &[f64]) -> Result<(), MdpError> {
        check_distribution(h, mu, self.num_states(h))
    }
}

fn check_distribution(h: usize, mu: &[f64], n: usize) -> Result<(), MdpError> {
    if mu.len() != n {
        return Err(MdpError::InvalidDistribution {
            epoch: h,
            what: format!("length {} for {} states", mu.len(), n),
        });
    }
    if mu.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
        return Err(MdpError::InvalidDistribution {
            epoch: h,
            what: "negative or non-finite entry".into(),
        });
    }
    let sum: f64 = mu.iter().sum();
    if (sum - 1.0).abs() > STOCHASTIC_TOL {
        return Err(MdpError::InvalidDistribution {
            epoch: h,
            what: format!("sums to {sum}"),
        });
    }
    Ok(())
}
