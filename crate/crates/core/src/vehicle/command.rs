use serde::{Deserialize, Serialize};

pub const PWM_MIN: u16 = 1000;
pub const PWM_MAX: u16 = 2000;
pub const PWM_NEUTRAL: u16 = 1500;

/// The nine-field drone command: four stick channels, four AUX channels
/// and the index of the drone it is addressed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommandMessage {
    pub rc_roll: u16,
    pub rc_pitch: u16,
    pub rc_yaw: u16,
    pub rc_throttle: u16,
    pub rc_aux1: u16,
    pub rc_aux2: u16,
    pub rc_aux3: u16,
    pub rc_aux4: u16,
    pub drone_index: u8,
}

impl Default for CommandMessage {
    fn default() -> Self {
        Self::neutral(0)
    }
}

pub fn clamp_pwm(value: i64) -> u16 {
    value.clamp(PWM_MIN as i64, PWM_MAX as i64) as u16
}

impl CommandMessage {
    pub fn neutral(drone_index: u8) -> Self {
        Self {
            rc_roll: PWM_NEUTRAL,
            rc_pitch: PWM_NEUTRAL,
            rc_yaw: PWM_NEUTRAL,
            rc_throttle: PWM_NEUTRAL,
            rc_aux1: PWM_NEUTRAL,
            rc_aux2: PWM_NEUTRAL,
            rc_aux3: PWM_NEUTRAL,
            rc_aux4: PWM_NEUTRAL,
            drone_index,
        }
    }

    /// The stock disarm message: throttle low, AUX4 at 1200.
    pub fn disarm(drone_index: u8) -> Self {
        Self {
            rc_throttle: 1000,
            rc_aux1: 0,
            rc_aux2: 0,
            rc_aux3: 0,
            rc_aux4: 1200,
            ..Self::neutral(drone_index)
        }
        .clamped()
    }

    pub fn arm(drone_index: u8) -> Self {
        Self {
            rc_throttle: 1000,
            ..Self::neutral(drone_index)
        }
    }

    pub fn channels(&self) -> [u16; 8] {
        [
            self.rc_roll,
            self.rc_pitch,
            self.rc_yaw,
            self.rc_throttle,
            self.rc_aux1,
            self.rc_aux2,
            self.rc_aux3,
            self.rc_aux4,
        ]
    }

    pub fn from_channels(channels: [u16; 8], drone_index: u8) -> Self {
        Self {
            rc_roll: channels[0],
            rc_pitch: channels[1],
            rc_yaw: channels[2],
            rc_throttle: channels[3],
            rc_aux1: channels[4],
            rc_aux2: channels[5],
            rc_aux3: channels[6],
            rc_aux4: channels[7],
            drone_index,
        }
    }

    pub fn clamped(&self) -> Self {
        let c = self.channels().map(|v| clamp_pwm(v as i64));
        Self::from_channels(c, self.drone_index)
    }

    pub fn in_range(&self) -> bool {
        self.channels().iter().all(|&v| (PWM_MIN..=PWM_MAX).contains(&v))
    }
}
