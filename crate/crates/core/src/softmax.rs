//! Tabular softmax parametrisation `π^θ(a|s) ∝ exp θ(s, a)` with one
//! parameter block per epoch.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mdp::{Block, FiniteMdp, TabularPolicy};

/// Parameters `θ[h][s][a]`, one entry per (epoch, state, action).
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTensor {
    blocks: Vec<Block>,
}

/// Gradients share the parameter layout.
pub type GradTensor = ParamTensor;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("malformed checkpoint JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read checkpoint: {0}")]
    Io(#[from] std::io::Error),
    #[error("checkpoint does not match the model: {0}")]
    Shape(String),
    #[error("non-finite parameter at (h={epoch}, s={state}, a={action})")]
    NonFinite {
        epoch: usize,
        state: String,
        action: String,
    },
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    epochs: Vec<BTreeMap<String, BTreeMap<String, f64>>>,
}

impl ParamTensor {
    /// `θ ≡ 0`, the uniform policy.
    pub fn zeros(mdp: &FiniteMdp) -> Self {
        let blocks = (0..mdp.horizon())
            .map(|h| {
                (0..mdp.num_states(h))
                    .map(|s| vec![0.0; mdp.num_actions(h, s)])
                    .collect()
            })
            .collect();
        Self { blocks }
    }

    pub fn from_blocks(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn into_blocks(self) -> Vec<Block> {
        self.blocks
    }

    /// Same layout as `self`, all zeros.
    pub fn zeros_like(&self) -> Self {
        Self {
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|row| vec![0.0; row.len()]).collect())
                .collect(),
        }
    }

    pub fn matches(&self, mdp: &FiniteMdp) -> bool {
        self.blocks.len() == mdp.horizon()
            && self.blocks.iter().enumerate().all(|(h, b)| {
                b.len() == mdp.num_states(h)
                    && b.iter().enumerate().all(|(s, row)| row.len() == mdp.num_actions(h, s))
            })
    }

    pub fn horizon(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, h: usize) -> &Block {
        &self.blocks[h]
    }

    pub fn block_mut(&mut self, h: usize) -> &mut Block {
        &mut self.blocks[h]
    }

    pub fn get(&self, h: usize, s: usize, a: usize) -> f64 {
        self.blocks[h][s][a]
    }

    pub fn set(&mut self, h: usize, s: usize, a: usize, value: f64) {
        self.blocks[h][s][a] = value;
    }

    /// Total number of entries, `Σ_h d_h`.
    pub fn dim(&self) -> usize {
        self.blocks.iter().flatten().map(Vec::len).sum()
    }

    /// Entries in `(h, s, a)` lexicographic order.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flatten().flatten().copied()
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(f64::is_finite)
    }

    pub fn norm(&self) -> f64 {
        self.values().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn block_norm(&self, h: usize) -> f64 {
        block_norm(&self.blocks[h])
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.values()
            .zip(other.values())
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// `self += scale · other`.
    pub fn add_scaled(&mut self, other: &Self, scale: f64) {
        for (b, ob) in self.blocks.iter_mut().zip(&other.blocks) {
            add_scaled_block(b, ob, scale);
        }
    }

    /// Reads a checkpoint `{ "epochs": [ { state: { action: num } } ] }`;
    /// every (h, s, a) of the model must be present exactly once.
    pub fn from_checkpoint_str(mdp: &FiniteMdp, text: &str) -> Result<Self, CheckpointError> {
        let file: CheckpointFile = serde_json::from_str(text)?;
        if file.epochs.len() != mdp.horizon() {
            return Err(CheckpointError::Shape(format!(
                "{} epochs for horizon {}",
                file.epochs.len(),
                mdp.horizon()
            )));
        }
        let mut theta = Self::zeros(mdp);
        for (h, states) in file.epochs.iter().enumerate() {
            let expected: usize = (0..mdp.num_states(h)).map(|s| mdp.num_actions(h, s)).sum();
            let mut seen = 0;
            for (state, actions) in states {
                let s = mdp.state_index(h, state).ok_or_else(|| {
                    CheckpointError::Shape(format!("unknown state {state:?} at epoch {h}"))
                })?;
                for (action, &value) in actions {
                    let a = mdp.action_index(h, s, action).ok_or_else(|| {
                        CheckpointError::Shape(format!(
                            "unknown action {action:?} for state {state:?} at epoch {h}"
                        ))
                    })?;
                    if !value.is_finite() {
                        return Err(CheckpointError::NonFinite {
                            epoch: h,
                            state: state.clone(),
                            action: action.clone(),
                        });
                    }
                    theta.set(h, s, a, value);
                    seen += 1;
                }
            }
            if seen != expected {
                return Err(CheckpointError::Shape(format!(
                    "epoch {h} has {seen} entries, model needs {expected}"
                )));
            }
        }
        Ok(theta)
    }

    pub fn from_checkpoint_file(
        mdp: &FiniteMdp,
        path: &std::path::Path,
    ) -> Result<Self, CheckpointError> {
        Self::from_checkpoint_str(mdp, &std::fs::read_to_string(path)?)
    }

    pub fn to_checkpoint_string(&self, mdp: &FiniteMdp) -> String {
        let epochs = self
            .blocks
            .iter()
            .enumerate()
            .map(|(h, block)| {
                block
                    .iter()
                    .enumerate()
                    .map(|(s, row)| {
                        let actions = row
                            .iter()
                            .enumerate()
                            .map(|(a, v)| (mdp.epoch(h).actions(s)[a].clone(), *v))
                            .collect();
                        (mdp.state_name(h, s).to_owned(), actions)
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&CheckpointFile { epochs }).expect("checkpoint serialises")
    }
}

pub(crate) fn block_norm(block: &Block) -> f64 {
    block.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn add_scaled_block(block: &mut Block, other: &Block, scale: f64) {
    for (row, orow) in block.iter_mut().zip(other) {
        for (x, y) in row.iter_mut().zip(orow) {
            *x += scale * y;
        }
    }
}

/// Softmax of one row with max subtraction.
pub fn softmax_row(theta: &[f64]) -> Vec<f64> {
    let max = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = theta.iter().map(|t| (t - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Per-state softmax of a single epoch block.
pub fn softmax_block(block: &Block) -> Block {
    block.iter().map(|row| softmax_row(row)).collect()
}

/// `π^θ`.
pub fn policy_of(theta: &ParamTensor) -> TabularPolicy {
    TabularPolicy::from_rows(theta.blocks.iter().map(softmax_block).collect())
}

/// `∇_θ log π^θ(a|s)` at epoch `h`: `1{a = a'} - π^θ(a'|s)` on row (h, s),
/// zero elsewhere.
pub fn log_policy_grad(theta: &ParamTensor, h: usize, s: usize, a: usize) -> GradTensor {
    let mut grad = theta.zeros_like();
    let pi = softmax_row(&theta.blocks[h][s]);
    for (b, (g, p)) in grad.blocks[h][s].iter_mut().zip(&pi).enumerate() {
        *g = f64::from(u8::from(a == b)) - p;
    }
    grad
}

/// `(max_{h,s,a} |π^{θ1} - π^{θ2}|, ‖θ1 - θ2‖₂)`.
pub fn lipschitz_gap(theta1: &ParamTensor, theta2: &ParamTensor) -> (f64, f64) {
    let p1 = policy_of(theta1);
    let p2 = policy_of(theta2);
    let mut gap: f64 = 0.0;
    for h in 0..theta1.horizon() {
        for (r1, r2) in p1.epoch(h).iter().zip(p2.epoch(h)) {
            for (x, y) in r1.iter().zip(r2) {
                gap = gap.max((x - y).abs());
            }
        }
    }
    (gap, theta1.distance(theta2))
}
