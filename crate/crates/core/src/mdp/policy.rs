use super::model::{FiniteMdp, MdpError, STOCHASTIC_TOL};

/// Per-epoch rows `[s][a]` of probabilities (or any per-(s, a) quantity).
pub type Block = Vec<Vec<f64>>;

/// A time-dependent tabular policy `π = (π_h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    probs: Vec<Block>,
}

impl TabularPolicy {
    pub fn new(mdp: &FiniteMdp, probs: Vec<Block>) -> Result<Self, MdpError> {
        let policy = Self { probs };
        policy.check(mdp)?;
        Ok(policy)
    }

    /// Builds a policy without validation. Rows are produced by softmax or by
    /// construction and are stochastic up to rounding.
    pub(crate) fn from_rows(probs: Vec<Block>) -> Self {
        Self { probs }
    }

    pub fn uniform(mdp: &FiniteMdp) -> Self {
        let probs = (0..mdp.horizon())
            .map(|h| {
                (0..mdp.num_states(h))
                    .map(|s| {
                        let n = mdp.num_actions(h, s);
                        vec![1.0 / n as f64; n]
                    })
                    .collect()
            })
            .collect();
        Self { probs }
    }

    /// Deterministic policy choosing `choice[h][s]` everywhere.
    pub fn deterministic(mdp: &FiniteMdp, choice: &[Vec<usize>]) -> Self {
        let probs = (0..mdp.horizon())
            .map(|h| {
                (0..mdp.num_states(h))
                    .map(|s| {
                        let mut row = vec![0.0; mdp.num_actions(h, s)];
                        row[choice[h][s]] = 1.0;
                        row
                    })
                    .collect()
            })
            .collect();
        Self { probs }
    }

    pub fn check(&self, mdp: &FiniteMdp) -> Result<(), MdpError> {
        if self.probs.len() != mdp.horizon() {
            return Err(MdpError::HorizonMismatch {
                declared: mdp.horizon(),
                found: self.probs.len(),
            });
        }
        for (h, block) in self.probs.iter().enumerate() {
            if block.len() != mdp.num_states(h) {
                return Err(MdpError::Shape {
                    epoch: h,
                    what: format!("policy has {} rows for {} states", block.len(), mdp.num_states(h)),
                });
            }
            for (s, row) in block.iter().enumerate() {
                let ok = row.len() == mdp.num_actions(h, s)
                    && row.iter().all(|p| p.is_finite() && *p >= 0.0)
                    && (row.iter().sum::<f64>() - 1.0).abs() <= STOCHASTIC_TOL;
                if !ok {
                    return Err(MdpError::InvalidPolicy {
                        epoch: h,
                        state: mdp.state_name(h, s).to_owned(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, h: usize, s: usize, a: usize) -> f64 {
        self.probs[h][s][a]
    }

    pub fn row(&self, h: usize, s: usize) -> &[f64] {
        &self.probs[h][s]
    }

    pub fn epoch(&self, h: usize) -> &Block {
        &self.probs[h]
    }

    /// The composite policy `(block, π_(h+1))` with epoch `h` replaced.
    pub fn with_epoch(&self, h: usize, block: Block) -> Self {
        let mut probs = self.probs.clone();
        probs[h] = block;
        Self { probs }
    }

    /// Action of largest probability per (h, s), ties to the smallest index.
    pub fn greedy_actions(&self) -> Vec<Vec<usize>> {
        self.probs
            .iter()
            .map(|block| block.iter().map(|row| argmax(row)).collect())
            .collect()
    }
}

/// Index of the maximum, smallest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}
