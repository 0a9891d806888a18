//! External position control: three parallel PID loops, loop timing,
//! waypoint sequencing and two gain auto-tuning procedures.

mod autotune;
mod pid;
mod plant;
mod position;
mod relay;
mod timing;
mod waypoint;

pub use autotune::{
    axis_metrics, iterative_autotune, AutotuneConfig, AutotuneReport, AxisMetrics, AxisRanges, FirstOrderSurrogate,
    GainRange, TrialRecord, TrialResponse, TuningPlant, AXIS_NAMES,
};
pub use pid::{pid_step, PidGains, PidState, OUTPUT_LIMIT};
pub use plant::{overshoot, step_response, FirstOrderPlant, Plant, SecondOrderPlant};
pub use position::{position_controller, AxisGains, AxisStates, ControlOutput, PositionController, Setpoint};
pub use relay::{
    relay_tune, zn_gains, zn_gains_named, ControllerType, Oscillation, RelayConfig, RelayTuneResult, RelayTuner,
};
pub use timing::{compute_sample_time, LoopTiming};
pub use waypoint::{waypoint_navigate, WaypointEvent, WaypointEventKind, WaypointNavigator};

use crate::vehicle::CommandMessage;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ControlError {
    #[error("pose is {age:.3} s old")]
    StalePose { age: f64, neutral: CommandMessage },
    #[error("frame rate must be positive, got {0}")]
    NonPositiveFps(f64),
    #[error("PID time and buffer must be non-negative")]
    NegativeTiming,
    #[error("waypoint list is empty")]
    EmptyWaypointList,
    #[error("only {observed} of {required} relay oscillations observed")]
    NoOscillation { observed: usize, required: usize },
    #[error("unknown controller type {0:?}")]
    UnknownControllerType(String),
    #[error("{axis} {gain} left its range before convergence")]
    RangeExhausted {
        axis: &'static str,
        gain: &'static str,
        last: AxisGains,
    },
    #[error("oscillation grew beyond the safety bound")]
    Unstable { last_stable: AxisGains },
    #[error("no convergence after {0} trials")]
    IterationLimit(usize),
}
