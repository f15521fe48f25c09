//! Safe active learning along trajectories.

mod sal;
mod trajectory;

pub use sal::{
    acquire, penalty_unsafe, run_sal, run_sal_on_grid, Acquisition, CandidateVerdict, ExperimentRecord, MeasureMode,
    RecordRow, SalConfig, SalRun, SalSummary, StopReason,
};
pub use trajectory::{generate_candidates, Domain, Trajectory};
