//! Exact GP regression with a squared-exponential kernel, trajectory
//! posteriors, joint sampling and the standard normal helpers shared by the
//! safety deciders.

mod kernel;
mod linalg;
mod model;
mod normal;
mod sampling;

pub use kernel::{se_kernel, Hyperparams};
pub use linalg::jittered_cholesky;
pub use model::{Dataset, GpModel, TrajectoryPosterior};
pub use normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
pub use sampling::{map_draws, sample_trajectories, GaussianSampler, CHUNK_SIZE};

/// Posterior probability that the latent function is below zero at `x`.
pub fn pointwise_unsafe_prob(model: &GpModel, x: &[f64]) -> crate::Result<f64> {
    model.pointwise_unsafe_prob(x)
}
