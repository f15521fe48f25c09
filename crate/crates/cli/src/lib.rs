//! Command implementations behind the `safegp` binary.

pub mod commands;
mod error;
pub mod manifest;
pub mod settings;

pub use commands::{
    cmd_calibrate, cmd_compare_bounds, cmd_evaluate, cmd_run_sal, CalibrateConfig, CompareBoundsConfig,
    CompareBoundsSummary, EvaluateConfig, PosteriorInput, RunSalConfig, RunSalSummary,
};
pub use error::{CliError, CliResult};
pub use manifest::{read_manifest, RunManifest};
