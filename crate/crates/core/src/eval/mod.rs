//! Baseline policies, batch episode runner, agronomic efficiency metrics,
//! CSV output and the stage-threshold calibration.

mod calibrate;
mod metrics;
mod policy;
mod remote;
mod report;
mod runner;

pub use calibrate::{calibrate, CalibrationReport, FERTILIZATION_STAGE_DAYS};
pub use metrics::{
    ane, ane_from_means, objective_j, summarize, wue, wue_from_means, Efficiency, IndicatorStat, MetricError,
    MetricsSummary, WUE_FACTOR,
};
pub use policy::{
    expert_fertilization, expert_irrigation, expert_policy, ExpertBoth, NullPolicy, Policy, PolicyTable, Resource,
    TableError,
};
pub use remote::{serve_remote_batch, RemoteError};
pub use report::{histogram, write_histogram_csv, write_summary_csv, write_trajectory_csv, HistogramBin};
pub use runner::{run_episode, run_episodes, DayRecord, EpisodeLog, EvalError, FinalIndicators};
