//! Reading and writing the JSON model file.
//!
//! ```json
//! { "horizon": 2, "r_star": 1.0,
//!   "epochs": [ { "states": ["x"], "actions": {"x": ["go"]},
//!                 "rewards": {"x": {"go": 0.5}},
//!                 "transitions": {"x": {"go": {"y": 1.0}}} },
//!               { "states": ["y"], "actions": {"y": ["go"]},
//!                 "rewards": {"y": {"go": 1.0}} } ],
//!   "start": {"x": 1.0} }
//! ```
//!
//! `start` is optional and defaults to uniform over the first epoch. Target
//! states omitted from a transition row have probability zero.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::model::{Epoch, FiniteMdp, MdpError};

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("cannot read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] MdpError),
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    horizon: usize,
    epochs: Vec<EpochFile>,
    r_star: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EpochFile {
    states: Vec<String>,
    actions: HashMap<String, Vec<String>>,
    rewards: HashMap<String, HashMap<String, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transitions: Option<HashMap<String, HashMap<String, HashMap<String, f64>>>>,
}

fn missing(epoch: usize, what: String) -> MdpError {
    MdpError::Shape { epoch, what }
}

impl FiniteMdp {
    pub fn from_json_str(text: &str) -> Result<Self, ModelFileError> {
        let file: ModelFile = serde_json::from_str(text)?;
        Ok(build(file)?)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, ModelFileError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        let horizon = self.horizon();
        let epochs = (0..horizon)
            .map(|h| {
                let e = self.epoch(h);
                let mut actions = HashMap::new();
                let mut rewards = HashMap::new();
                let mut transitions = HashMap::new();
                for (s, name) in e.states().iter().enumerate() {
                    actions.insert(name.clone(), e.actions(s).to_vec());
                    let mut r = HashMap::new();
                    let mut t = HashMap::new();
                    for (a, act) in e.actions(s).iter().enumerate() {
                        r.insert(act.clone(), self.reward(h, s, a));
                        if h + 1 < horizon {
                            let row = self
                                .transition(h, s, a)
                                .iter()
                                .enumerate()
                                .filter(|(_, p)| **p != 0.0)
                                .map(|(t, p)| (self.state_name(h + 1, t).to_owned(), *p))
                                .collect();
                            t.insert(act.clone(), row);
                        }
                    }
                    rewards.insert(name.clone(), r);
                    transitions.insert(name.clone(), t);
                }
                EpochFile {
                    states: e.states().to_vec(),
                    actions,
                    rewards,
                    transitions: (h + 1 < horizon).then_some(transitions),
                }
            })
            .collect();
        let start = self
            .epoch(0)
            .states()
            .iter()
            .cloned()
            .zip(self.start().iter().copied())
            .collect();
        let file = ModelFile {
            horizon,
            epochs,
            r_star: self.r_star(),
            start: Some(start),
        };
        serde_json::to_string_pretty(&file).expect("model serialises")
    }
}

fn build(file: ModelFile) -> Result<FiniteMdp, MdpError> {
    if file.horizon != file.epochs.len() {
        return Err(MdpError::HorizonMismatch {
            declared: file.horizon,
            found: file.epochs.len(),
        });
    }
    let horizon = file.epochs.len();
    let index_of: Vec<HashMap<&str, usize>> = file
        .epochs
        .iter()
        .map(|e| e.states.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect())
        .collect();

    let mut epochs = Vec::with_capacity(horizon);
    for (h, ef) in file.epochs.iter().enumerate() {
        for key in ef.actions.keys().chain(ef.rewards.keys()) {
            if !index_of[h].contains_key(key.as_str()) {
                return Err(MdpError::UnknownState {
                    epoch: h,
                    state: key.clone(),
                });
            }
        }
        let mut actions = Vec::with_capacity(ef.states.len());
        let mut rewards = Vec::with_capacity(ef.states.len());
        let mut transitions = Vec::new();
        for s in &ef.states {
            let acts = ef
                .actions
                .get(s)
                .ok_or_else(|| missing(h, format!("no action list for state {s:?}")))?;
            let rrow = ef
                .rewards
                .get(s)
                .ok_or_else(|| missing(h, format!("no rewards for state {s:?}")))?;
            for a in rrow.keys() {
                if !acts.contains(a) {
                    return Err(MdpError::UnknownAction {
                        epoch: h,
                        state: s.clone(),
                        action: a.clone(),
                    });
                }
            }
            let r = acts
                .iter()
                .map(|a| {
                    rrow.get(a)
                        .copied()
                        .ok_or_else(|| missing(h, format!("no reward for ({s:?}, {a:?})")))
                })
                .collect::<Result<Vec<_>, _>>()?;
            actions.push(acts.clone());
            rewards.push(r);

            match (&ef.transitions, h + 1 < horizon) {
                (Some(map), false) if !map.is_empty() => {
                    return Err(MdpError::TerminalTransitions { state: s.clone() });
                }
                (_, false) => {}
                (None, true) => return Err(missing(h, "transitions missing".into())),
                (Some(map), true) => {
                    let trow = map
                        .get(s)
                        .ok_or_else(|| missing(h, format!("no transitions for state {s:?}")))?;
                    let next = &index_of[h + 1];
                    let mut per_action = Vec::with_capacity(acts.len());
                    for a in acts {
                        let targets = trow.get(a).ok_or_else(|| {
                            missing(h, format!("no transition row for ({s:?}, {a:?})"))
                        })?;
                        let mut row = vec![0.0; next.len()];
                        for (t, p) in targets {
                            let &j = next.get(t.as_str()).ok_or_else(|| MdpError::UnknownTarget {
                                epoch: h,
                                state: s.clone(),
                                action: a.clone(),
                                target: t.clone(),
                            })?;
                            row[j] = *p;
                        }
                        per_action.push(row);
                    }
                    transitions.push(per_action);
                }
            }
        }
        epochs.push(Epoch::new(ef.states.clone(), actions, rewards, transitions));
    }

    match file.start {
        None => FiniteMdp::new(epochs, file.r_star),
        Some(map) => {
            let first = epochs.first().ok_or(MdpError::EmptyHorizon)?;
            let mut start = vec![0.0; first.num_states()];
            for (name, p) in map {
                let &i = index_of[0].get(name.as_str()).ok_or(MdpError::UnknownState {
                    epoch: 0,
                    state: name.clone(),
                })?;
                start[i] = p;
            }
            FiniteMdp::with_start(epochs, file.r_star, start)
        }
    }
}
