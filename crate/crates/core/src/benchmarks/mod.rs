//! Ground-truth test functions, experiment presets and exploration metrics.

mod functions;
mod metrics;
mod presets;

pub use functions::{himmelblau, himmelblau_safety, toy1d};
pub use metrics::{EvalGrid, GridTracker};
pub use presets::{himmelblau_preset, preset, toy_preset, toy_trajectory_points, Benchmark, InitialDesign};

use crate::gp::GpModel;

/// Root-mean-squared error of the posterior mean on the benchmark grid.
pub fn rmse(model: &GpModel, bench: &Benchmark) -> f64 {
    bench.eval_grid().rmse(model)
}

/// Sign agreement between posterior mean and ground truth on the benchmark grid.
pub fn health_coverage(model: &GpModel, bench: &Benchmark) -> f64 {
    bench.eval_grid().health_coverage(model)
}
