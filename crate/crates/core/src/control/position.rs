use serde::{Deserialize, Serialize};

use super::{pid_step, ControlError, LoopTiming, PidGains, PidState};
use crate::geometry::WhyConPose;
use crate::vehicle::{clamp_pwm, CommandMessage, PWM_NEUTRAL};

/// Target position in WhyCon units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Setpoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Setpoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn error(&self, pose: &WhyConPose) -> [f64; 3] {
        [pose.x - self.x, pose.y - self.y, pose.z - self.z]
    }

    pub fn distance(&self, pose: &WhyConPose) -> f64 {
        let [ex, ey, ez] = self.error(pose);
        (ex * ex + ey * ey + ez * ez).sqrt()
    }
}

/// Gains for the three parallel controllers.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisGains {
    pub roll: PidGains,
    pub pitch: PidGains,
    pub throttle: PidGains,
}

impl AxisGains {
    pub fn as_array(&self) -> [PidGains; 3] {
        [self.roll, self.pitch, self.throttle]
    }

    pub fn from_array(g: [PidGains; 3]) -> Self {
        Self {
            roll: g[0],
            pitch: g[1],
            throttle: g[2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisStates {
    pub roll: PidState,
    pub pitch: PidState,
    pub throttle: PidState,
    pub last_time: Option<f64>,
}

impl AxisStates {
    pub fn reset(&mut self) {
        self.roll.reset();
        self.pitch.reset();
        self.throttle.reset();
        self.last_time = None;
    }
}

/// Offsets computed on one tick, for logging.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlOutput {
    pub command: CommandMessage,
    pub error: [f64; 3],
    pub offsets: [f64; 3],
}

/// The three parallel external controllers for one drone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionController {
    pub gains: AxisGains,
    pub timing: LoopTiming,
    /// Constant throttle offset added to the throttle channel.
    pub throttle_trim: f64,
    pub drone_index: u8,
    pub states: AxisStates,
}

impl PositionController {
    pub fn new(gains: AxisGains, timing: LoopTiming, throttle_trim: f64, drone_index: u8) -> Self {
        Self {
            gains,
            timing,
            throttle_trim,
            drone_index,
            states: AxisStates::default(),
        }
    }

    pub fn update(&mut self, current: &WhyConPose, sp: &Setpoint, now: f64) -> Result<ControlOutput, ControlError> {
        position_controller(current, sp, self, now)
    }
}

/// Run the roll, pitch and throttle controllers on a pose snapshot.
///
/// Pitch acts on the x error, roll on the y error and throttle on the z error.
/// WhyCon z grows away from the camera, so a positive z error means the drone
/// is too low.
pub fn position_controller(
    current: &WhyConPose,
    sp: &Setpoint,
    ctrl: &mut PositionController,
    now: f64,
) -> Result<ControlOutput, ControlError> {
    let age = now - current.timestamp;
    if age > ctrl.timing.stale_after() {
        return Err(ControlError::StalePose {
            age,
            neutral: CommandMessage::neutral(ctrl.drone_index),
        });
    }
    let states = &mut ctrl.states;
    let gains = &ctrl.gains;
    let dt = match states.last_time {
        Some(t) if now > t => now - t,
        _ => ctrl.timing.sample_time,
    };
    states.last_time = Some(now);
    let error = sp.error(current);
    let (ux, pitch) = pid_step(&gains.pitch, &states.pitch, error[0], dt);
    let (uy, roll) = pid_step(&gains.roll, &states.roll, error[1], dt);
    let (uz, throttle) = pid_step(&gains.throttle, &states.throttle, error[2], dt);
    states.pitch = pitch;
    states.roll = roll;
    states.throttle = throttle;

    let neutral = PWM_NEUTRAL as f64;
    let command = CommandMessage {
        rc_roll: clamp_pwm((neutral - uy).round() as i64),
        rc_pitch: clamp_pwm((neutral + ux).round() as i64),
        rc_throttle: clamp_pwm((neutral + ctrl.throttle_trim + uz).round() as i64),
        ..CommandMessage::neutral(ctrl.drone_index)
    };
    Ok(ControlOutput {
        command,
        error,
        offsets: [ux, uy, uz],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctrl(index: u8) -> PositionController {
        let g = PidGains::new(5.0, 0.5, 2.0);
        let gains = AxisGains {
            roll: g,
            pitch: g,
            throttle: g,
        };
        PositionController::new(gains, LoopTiming::default(), 0.0, index)
    }

    #[test]
    fn at_setpoint_is_neutral() {
        let pose = WhyConPose::new(1.0, 2.0, 30.0).at(1.0);
        let sp = Setpoint::new(1.0, 2.0, 30.0);
        let out = ctrl(0).update(&pose, &sp, 1.0).unwrap();
        assert_eq!(out.command, CommandMessage::neutral(0));
    }

    #[test]
    fn x_error_moves_pitch_only() {
        let pose = WhyConPose::new(2.0, 0.0, 30.0).at(0.0);
        let sp = Setpoint::new(0.0, 0.0, 30.0);
        let out = ctrl(0).update(&pose, &sp, 0.0).unwrap();
        assert_ne!(out.command.rc_pitch, 1500);
        assert_eq!(out.command.rc_roll, 1500);
        assert_eq!(out.command.rc_throttle, 1500);
        assert_eq!(out.command.rc_yaw, 1500);
    }

    #[test]
    fn stale_pose_yields_neutral() {
        let timing = LoopTiming::default();
        let pose = WhyConPose::new(2.0, 0.0, 30.0).at(0.0);
        let sp = Setpoint::default();
        let err = ctrl(1).update(&pose, &sp, 3.0 * timing.sample_time).unwrap_err();
        match err {
            ControlError::StalePose { neutral, .. } => assert_eq!(neutral, CommandMessage::neutral(1)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn signs_drive_toward_setpoint() {
        // drone low and on the +x, +y side of the setpoint
        let pose = WhyConPose::new(3.0, 3.0, 33.0).at(0.0);
        let sp = Setpoint::new(0.0, 0.0, 30.0);
        let out = ctrl(0).update(&pose, &sp, 0.0).unwrap();
        assert!(out.command.rc_throttle > 1500);
        assert!(out.command.rc_pitch > 1500);
        assert!(out.command.rc_roll < 1500);
    }
}
