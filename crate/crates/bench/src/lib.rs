//! Shared fixtures for the criterion benchmarks.

use safegp::benchmarks::{toy_preset, toy_trajectory_points};
use safegp::gp::{GpModel, TrajectoryPosterior};

/// Toy posterior over the 50-point discretization of `[0, 1]`.
pub fn toy_posterior() -> TrajectoryPosterior {
    let b = toy_preset();
    let model = GpModel::fit_with_prior_mean(b.hyperparams.clone(), b.initial_data(0), b.prior_mean)
        .expect("toy model fits");
    model.trajectory_posterior(&toy_trajectory_points(b.m)).expect("toy posterior")
}
