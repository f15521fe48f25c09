//! Gaussian-process trajectory safety: exact GP posteriors, sampling-based
//! and Borell-TIS deciders with error control, and a safe active-learning
//! loop on benchmark functions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod active;
pub mod benchmarks;
mod error;
pub mod gp;
pub mod rng;
pub mod safety;

pub use active::{run_sal, Domain, ExperimentRecord, MeasureMode, SalConfig, SalRun, Trajectory};
pub use error::{Error, Result};
pub use gp::{Dataset, GpModel, Hyperparams, TrajectoryPosterior};
pub use safety::{decide, DeciderConfig, Decision, Method, Reason, SafetyVerdict, SamplingSchedule};
