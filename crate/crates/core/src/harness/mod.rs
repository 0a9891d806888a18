//! Scenario runner: perception, control, command channel and vehicles on a
//! simulated clock, with TOML configs, CSV logs and JSON metrics.

mod config;
mod log;
mod metrics;
mod missions;
mod scenarios;
mod sim;

pub use config::{
    AutotuneScenarioConfig, CameraConfig, DriftConfig, DroneConfig, Envelope, FormationConfig, GainsConfig, HoldConfig,
    HoopScenarioConfig, LandingConfig, LatencyConfig, OutputConfig, RelayScenarioConfig, ScenarioConfig, ScenarioKind,
    TimingConfig, WaypointConfig,
};
pub use log::{LogRow, RunLog, CSV_HEADER};
pub use metrics::{overshoot, summarize, AxisSummary, LogSummary, Metrics, StepSummary, METRICS_SCHEMA_VERSION};
pub use missions::{FormationMission, HoldMission, LandingMission, LandingPhase, RelayMission, WaypointMission};
pub use scenarios::{
    autotune_config, error_traces, formation_angle, formation_circle, formation_square, hoop_traversal,
    internal_only_drift, iterative_autotune_scenario, landing_scenario, position_hold, run, sim_setup, tail_error,
    waypoint_nav, zn_autotune, LandingOutcome, ScenarioOutcome, SimTuningPlant, StepMission,
};
pub use sim::{
    simulate, stream_seed, to_whycon, to_world, Directive, Disturbance, Feedback, Mission, PerceptionConfig,
    PerceptionMode, PlatformSetup, SimOutput, SimSetup, TickInput, Touchdown,
};

use crate::planning::PlanError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },
    #[error("scenario aborted: {reason}")]
    ScenarioAborted { reason: String, log: Box<RunLog> },
    #[error("no touchdown within {duration} s")]
    LandingTimeout { duration: f64, log: Box<RunLog> },
    #[error("log has no rows")]
    EmptyLog,
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        HarnessError::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    /// The log recorded up to the failure, when the run got that far.
    pub fn partial_log(&self) -> Option<&RunLog> {
        match self {
            HarnessError::ScenarioAborted { log, .. } | HarnessError::LandingTimeout { log, .. } => Some(log),
            _ => None,
        }
    }
}
