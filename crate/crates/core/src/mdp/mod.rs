//! Finite-time-horizon tabular MDPs: model, policies, exact evaluation,
//! the backward-induction oracle, and trajectory sampling.

mod eval;
mod json;
mod model;
mod policy;
mod sampling;

pub(crate) use eval::{dot, q_from_next};
pub use eval::{
    backward_induction_optimal, evaluate_policy, performance_difference, state_visitation,
    visitation_from, ValueTables, VisitationMeasures,
};
pub use json::ModelFileError;
pub use model::{Epoch, FiniteMdp, MdpError, STOCHASTIC_TOL};
pub use policy::{argmax, Block, TabularPolicy};
pub use sampling::{sample_categorical, sample_trajectory, Step, Substreams, Trajectory};
