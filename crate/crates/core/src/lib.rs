//! Exact and stochastic policy gradient for finite-time-horizon tabular MDPs.

pub mod bench;
pub mod gradient;
pub mod mdp;
pub mod softmax;
pub mod stochastic;
pub mod trainers;
