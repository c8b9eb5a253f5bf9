//! Scenario definition, ground truth, closed-loop runs and Monte Carlo
//! sweeps.

mod config;
mod monte_carlo;
mod run;
mod truth;

pub use config::{
    AntennaConfig, FilterConfig, ModeSchedule, ObjectConfig, PlannerSettings, PlannerVariant, ReceiverConfig,
    ScenarioConfig, TruthConfig, UavConfig,
};
pub use monte_carlo::{monte_carlo, noise_levels, write_sweep, MonteCarloResult, SweepRow, SWEEP_HEADER};
pub use run::{
    check_kinematics, run_closed_loop, write_decisions, write_metrics, write_outputs, write_trajectory,
    DecisionRecord, RunLog, RunSummary, StepRecord, METRICS_HEADER,
};
pub use truth::{simulate_truth, GroundTruth, Trajectory};
