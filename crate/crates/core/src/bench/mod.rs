//! Built-in models, experiment orchestration and convergence-rate fits.

mod experiment;
mod models;
mod rate;

pub use experiment::{
    compare_schemes, run_experiment, write_outputs, CompareCell, CompareOptions, CompareRow,
    ExperimentError, ExperimentResult, ExperimentSpec, Mode, ModelSource, ScheduleOverrides,
    ScheduleSource, ScheduleUsed, SchemeKind, Summary, DEFAULT_DELTA, DEFAULT_EXACT_BUDGET,
    DEFAULT_STOCHASTIC_BUDGET, LOG_FILE, SUMMARY_FILE, THETA_FILE,
};
pub use models::{
    build_bandit2, build_dice, random_distribution, random_mdp, RandomMdpSpec, DICE_CONTINUE,
    DICE_STOP, DICE_STOPPED,
};
pub use rate::{endpoint_rate, estimate_rate, fit_log_log, RateError, RateEstimate};
