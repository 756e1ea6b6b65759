//! Data generators and the Monte Carlo experiment harness.

pub mod generators;
pub mod harness;
pub mod rng;

pub use generators::{
    gen_gaussian_mean, gen_gaussian_mixture, gen_hidim_linear, gen_sequence_obs, gen_sequence_rows,
    planar_pair,
};
pub use harness::{
    estimate_risk, mean_and_se, mixture_bayes_error, pairwise_sum, run_experiment,
    select_by_validation, Learner, ResultRow, Selection, Task, TrainingSet, Truth, MIN_VALIDATION,
};
pub use rng::{stream_id, Purpose, SimRng};
