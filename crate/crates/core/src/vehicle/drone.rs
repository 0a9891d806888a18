use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{CommandMessage, VehicleError, PWM_NEUTRAL};
use crate::geometry::Vec3;

pub const GRAVITY: f64 = 9.81;
pub const MAX_STEP: f64 = 0.05;

/// Point-mass quadrotor with first-order attitude response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VehicleParams {
    pub hover_pwm: f64,
    /// Climb rate per PWM count above hover, m/s.
    pub k_t: f64,
    /// Linear horizontal drag, 1/s.
    pub drag: f64,
    pub tau_att: f64,
    pub max_tilt_deg: f64,
    /// AUX4 at or above this arms the drone.
    pub arm_threshold: u16,
    /// Attitude the airframe settles to under neutral sticks, degrees.
    pub roll_trim_deg: f64,
    pub pitch_trim_deg: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            hover_pwm: 1550.0,
            k_t: 0.004,
            drag: 0.3,
            tau_att: 0.1,
            max_tilt_deg: 30.0,
            arm_threshold: 1450,
            roll_trim_deg: 0.0,
            pitch_trim_deg: 0.0,
        }
    }
}

impl VehicleParams {
    /// Commanded tilt for a stick channel, radians.
    pub fn tilt_for(&self, pwm: u16) -> f64 {
        let frac = (pwm as f64 - PWM_NEUTRAL as f64) / 500.0;
        frac.clamp(-1.0, 1.0) * self.max_tilt_deg.to_radians()
    }

    pub fn max_horizontal_speed(&self) -> f64 {
        GRAVITY * self.max_tilt_deg.to_radians().tan() / self.drag
    }
}

/// What the drone believes about itself from onboard integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelfEstimate {
    pub position: Vec3,
    pub velocity_bias: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneState {
    pub position: Vec3,
    pub velocity: Vec3,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub battery: f64,
    pub armed: bool,
    pub index: u8,
    pub estimate: SelfEstimate,
}

impl DroneState {
    /// Armed and hovering at rest at `position` (world meters).
    pub fn hovering(index: u8, position: Vec3) -> Self {
        Self {
            position,
            velocity: Vec3::zeros(),
            roll: 0.0,
            pitch: 0.0,
            yaw: 0.0,
            battery: 3.7,
            armed: true,
            index,
            estimate: SelfEstimate {
                position,
                velocity_bias: Vec3::zeros(),
            },
        }
    }

    pub fn estimate_error(&self) -> Vec3 {
        self.estimate.position - self.position
    }
}

/// IMU-integration drift on the self-estimate.
#[derive(Debug, Clone)]
pub struct DriftModel {
    pub enabled: bool,
    /// Velocity-bias random walk, m/s per √s, x and y.
    pub velocity_walk_std: f64,
    /// Constant altitude bias rate, m/s.
    pub altitude_bias_rate: f64,
    pub seed: u64,
    rng: ChaCha8Rng,
}

impl DriftModel {
    pub fn new(velocity_walk_std: f64, altitude_bias_rate: f64, seed: u64) -> Self {
        Self {
            enabled: true,
            velocity_walk_std,
            altitude_bias_rate,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn off() -> Self {
        Self {
            enabled: false,
            ..Self::new(0.0, 0.0, 0)
        }
    }
}

impl Default for DriftModel {
    fn default() -> Self {
        Self::new(0.01, 0.01, 0)
    }
}

/// Arm or disarm from AUX4.
pub fn apply_aux(s: &DroneState, cmd: &CommandMessage, params: &VehicleParams) -> DroneState {
    DroneState {
        armed: cmd.rc_aux4 >= params.arm_threshold,
        ..*s
    }
}

/// Advance the drone by `dt` seconds under `cmd`.
///
/// Truth is drift-free; the drift model only perturbs `estimate`.
pub fn step_drone(
    s: &DroneState,
    cmd: &CommandMessage,
    dt: f64,
    params: &VehicleParams,
    drift: &mut DriftModel,
) -> Result<DroneState, VehicleError> {
    if !(dt > 0.0 && dt <= MAX_STEP + 1e-12) {
        return Err(VehicleError::InvalidTimeStep(dt));
    }
    if !s.armed {
        return Err(VehicleError::Disarmed);
    }
    let cmd = cmd.clamped();
    let lag = 1.0 - (-dt / params.tau_att).exp();
    let roll_target = params.tilt_for(cmd.rc_roll) + params.roll_trim_deg.to_radians();
    let pitch_target = params.tilt_for(cmd.rc_pitch) + params.pitch_trim_deg.to_radians();
    let roll = s.roll + (roll_target - s.roll) * lag;
    let pitch = s.pitch + (pitch_target - s.pitch) * lag;

    // exact integration of v' = g tan(att) - drag v over the step
    let decay = (-params.drag * dt).exp();
    let mut velocity = s.velocity;
    let mut position = s.position;
    for (axis, tilt) in [(0usize, pitch), (1usize, roll)] {
        let v_ss = GRAVITY * tilt.tan() / params.drag;
        let v0 = s.velocity[axis];
        velocity[axis] = v_ss + (v0 - v_ss) * decay;
        position[axis] += v_ss * dt + (v0 - v_ss) * (1.0 - decay) / params.drag;
    }
    velocity.z = params.k_t * (cmd.rc_throttle as f64 - params.hover_pwm);
    position.z += velocity.z * dt;
    if position.z < 0.0 {
        position.z = 0.0;
        velocity.z = 0.0;
    }

    let mut estimate = s.estimate;
    if drift.enabled {
        let sd = drift.velocity_walk_std * dt.sqrt();
        for axis in 0..2 {
            let n: f64 = StandardNormal.sample(&mut drift.rng);
            estimate.velocity_bias[axis] += sd * n;
        }
        estimate.velocity_bias.z = drift.altitude_bias_rate;
    }
    estimate.position += (position - s.position) + estimate.velocity_bias * dt;

    Ok(DroneState {
        position,
        velocity,
        roll,
        pitch,
        yaw: s.yaw,
        battery: (s.battery - 2e-4 * dt).max(0.0),
        armed: true,
        index: s.index,
        estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hover_cmd(params: &VehicleParams) -> CommandMessage {
        CommandMessage {
            rc_throttle: params.hover_pwm as u16,
            ..CommandMessage::neutral(0)
        }
    }

    #[test]
    fn equilibrium_holds() {
        let params = VehicleParams::default();
        let mut s = DroneState::hovering(0, Vec3::new(0.3, -0.2, 1.0));
        let start = s.position;
        let mut drift = DriftModel::off();
        for _ in 0..1000 {
            s = step_drone(&s, &hover_cmd(&params), 0.01, &params, &mut drift).unwrap();
        }
        assert!((s.position - start).norm() < 1e-9);
        assert!(s.yaw.abs() < 1f64.to_radians());
    }

    #[test]
    fn pitch_moves_along_x_only() {
        let params = VehicleParams::default();
        let mut s = DroneState::hovering(0, Vec3::new(0.0, 0.0, 1.0));
        let cmd = CommandMessage {
            rc_pitch: 1600,
            ..hover_cmd(&params)
        };
        let mut drift = DriftModel::off();
        for _ in 0..100 {
            s = step_drone(&s, &cmd, 0.01, &params, &mut drift).unwrap();
        }
        assert!(s.position.x > 0.01);
        assert!(s.position.y.abs() < 1e-6);
        assert!((s.position.z - 1.0).abs() < 1e-6);
    }

    #[test]
    fn attitude_saturates() {
        let params = VehicleParams::default();
        let mut s = DroneState::hovering(0, Vec3::new(0.0, 0.0, 1.0));
        let cmd = CommandMessage {
            rc_roll: 2000,
            rc_pitch: 1000,
            ..hover_cmd(&params)
        };
        let mut drift = DriftModel::off();
        for _ in 0..300 {
            s = step_drone(&s, &cmd, 0.01, &params, &mut drift).unwrap();
            assert!(s.roll.abs() <= 30f64.to_radians() + 1e-12);
            assert!(s.pitch.abs() <= 30f64.to_radians() + 1e-12);
        }
    }

    #[test]
    fn aux_arms_and_disarms() {
        let params = VehicleParams::default();
        let s = DroneState::hovering(0, Vec3::new(0.0, 0.0, 1.0));
        let off = apply_aux(&s, &CommandMessage::disarm(0), &params);
        assert!(!off.armed);
        let on = apply_aux(&off, &CommandMessage::arm(0), &params);
        assert!(on.armed);
        assert!(!apply_aux(&on, &CommandMessage::disarm(0), &params).armed);
    }

    #[test]
    fn disarmed_drone_is_inert() {
        let params = VehicleParams::default();
        let s = apply_aux(
            &DroneState::hovering(0, Vec3::new(0.0, 0.0, 1.0)),
            &CommandMessage::disarm(0),
            &params,
        );
        let err = step_drone(&s, &hover_cmd(&params), 0.01, &params, &mut DriftModel::off());
        assert_eq!(err, Err(VehicleError::Disarmed));
    }

    #[test]
    fn rejects_bad_step() {
        let params = VehicleParams::default();
        let s = DroneState::hovering(0, Vec3::zeros());
        for dt in [0.0, -0.01, 0.06] {
            assert!(matches!(
                step_drone(&s, &hover_cmd(&params), dt, &params, &mut DriftModel::off()),
                Err(VehicleError::InvalidTimeStep(_))
            ));
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let params = VehicleParams::default();
        let run = |seed| {
            let mut s = DroneState::hovering(0, Vec3::new(0.0, 0.0, 1.0));
            let mut drift = DriftModel::new(0.01, 0.01, seed);
            for _ in 0..500 {
                s = step_drone(&s, &hover_cmd(&params), 0.01, &params, &mut drift).unwrap();
            }
            s
        };
        assert_eq!(run(7), run(7));
        assert_ne!(run(7).estimate, run(8).estimate);
        // truth is unaffected by drift
        assert_eq!(run(7).position, run(8).position);
    }

    #[test]
    fn drift_variance_grows() {
        let params = VehicleParams::default();
        let seeds = 100;
        let checkpoints = 30;
        let mut errors = vec![vec![0.0; seeds]; checkpoints];
        for seed in 0..seeds {
            let mut s = DroneState::hovering(0, Vec3::new(0.0, 0.0, 1.0));
            let mut drift = DriftModel::new(0.01, 0.0, seed as u64);
            for row in errors.iter_mut() {
                for _ in 0..50 {
                    s = step_drone(&s, &hover_cmd(&params), 0.02, &params, &mut drift).unwrap();
                }
                let e = s.estimate_error();
                row[seed] = e.x * e.x + e.y * e.y;
            }
        }
        let variances: Vec<f64> = errors.iter().map(|r| r.iter().sum::<f64>() / seeds as f64).collect();
        for w in variances.windows(2) {
            assert!(w[1] > w[0], "{variances:?}");
        }
    }
}
