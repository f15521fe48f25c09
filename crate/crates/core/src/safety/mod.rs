//! Trajectory safety deciders.
//!
//! A trajectory posterior `N(mu, Sigma)` with all `mu_j > 0` is rewritten as
//! the centered process `X = (mu - Z) / mu`; the trajectory is unsafe when
//! `max_j X_j >= 1`. The deciders estimate that probability by fixed-budget
//! sampling (MC), anytime-valid adaptive sampling (AMC), the Borell-TIS bound
//! around an adaptively sampled median (AB), or both at once (ABM).

mod bounds;
pub mod calibration;
mod center;
mod config;
mod deciders;
mod source;
mod tail_curve;
mod verdict;

pub use bounds::{
    borell_point_bound, borell_tail, empirical_quantile, mc_lower, mc_upper, median_quantile_levels,
    okamoto_radius, round_error_share, TailBound,
};
pub use center::{center, CenteredProcess, DETERMINISTIC_SIGMA};
pub use config::{DeciderConfig, Method, SamplingSchedule};
pub use deciders::{ab_decide, abm_decide, amc_decide, decide, mc_decide, run_decider, sign_change_verdict};
pub use source::{BernoulliIndicator, CenteredMaxima, MaximaSource};
pub use tail_curve::{tail_curve, MaximaSample, TailCurve, TailRow};
pub use verdict::{Decision, Reason, SafetyVerdict};
