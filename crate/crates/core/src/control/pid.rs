use serde::{Deserialize, Serialize};

pub const OUTPUT_LIMIT: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl PidGains {
    pub fn new(kp: f64, ki: f64, kd: f64) -> Self {
        Self { kp, ki, kd }
    }

    /// Build from the standard form; `None` means the term is absent.
    pub fn from_time_constants(kp: f64, ti: Option<f64>, td: Option<f64>) -> Self {
        Self {
            kp,
            ki: ti.map_or(0.0, |ti| kp / ti),
            kd: td.map_or(0.0, |td| kp * td),
        }
    }

    pub fn ti(&self) -> Option<f64> {
        (self.ki > 0.0).then(|| self.kp / self.ki)
    }

    pub fn td(&self) -> Option<f64> {
        (self.kd > 0.0 && self.kp > 0.0).then(|| self.kd / self.kp)
    }

    pub fn is_valid(&self) -> bool {
        [self.kp, self.ki, self.kd].iter().all(|g| g.is_finite() && *g >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidState {
    pub integral: f64,
    pub prev_error: Option<f64>,
    pub output_limit: f64,
    /// Bound on the integral contribution `Ki·∫e`.
    pub integral_limit: f64,
}

impl Default for PidState {
    fn default() -> Self {
        Self {
            integral: 0.0,
            prev_error: None,
            output_limit: OUTPUT_LIMIT,
            integral_limit: OUTPUT_LIMIT,
        }
    }
}

impl PidState {
    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_error = None;
    }
}

/// One controller update. Returns the clamped PWM offset and the new state.
pub fn pid_step(gains: &PidGains, state: &PidState, error: f64, dt: f64) -> (f64, PidState) {
    debug_assert!(dt > 0.0);
    let prev = state.prev_error.unwrap_or(error);
    let mut integral = state.integral + 0.5 * (prev + error) * dt;
    if gains.ki > 0.0 {
        let bound = state.integral_limit / gains.ki;
        integral = integral.clamp(-bound, bound);
    }
    let derivative = match state.prev_error {
        Some(p) => (error - p) / dt,
        None => 0.0,
    };
    let raw = gains.kp * error + gains.ki * integral + gains.kd * derivative;
    let output = raw.clamp(-state.output_limit, state.output_limit);
    let next = PidState {
        integral,
        prev_error: Some(error),
        ..*state
    };
    (output, next)
}
