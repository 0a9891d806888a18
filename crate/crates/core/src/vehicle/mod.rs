//! Simulated nano quadrotor and the ground platform used as a landing target.

mod command;
mod drone;
mod platform;

pub use command::{clamp_pwm, CommandMessage, PWM_MAX, PWM_MIN, PWM_NEUTRAL};
pub use drone::{
    apply_aux, step_drone, DriftModel, DroneState, SelfEstimate, VehicleParams, GRAVITY, MAX_STEP,
};
pub use platform::{distance_to_path, step_platform, PlatformState};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VehicleError {
    #[error("command applied to a disarmed drone")]
    Disarmed,
    #[error("time step {0} outside (0, 0.05] s")]
    InvalidTimeStep(f64),
    #[error("platform path is empty or has zero length")]
    EmptyPath,
}
