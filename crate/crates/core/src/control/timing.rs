use serde::{Deserialize, Serialize};

use super::ControlError;

/// External loop timing: the sample time is one camera frame, the worst-case
/// PID computation time and a safety buffer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopTiming {
    pub fps: f64,
    pub pid_time: f64,
    pub buffer: f64,
    pub sample_time: f64,
}

pub fn compute_sample_time(fps: f64, pid_time: f64, buffer: f64) -> Result<LoopTiming, ControlError> {
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(ControlError::NonPositiveFps(fps));
    }
    if !(pid_time >= 0.0 && buffer >= 0.0) {
        return Err(ControlError::NegativeTiming);
    }
    Ok(LoopTiming {
        fps,
        pid_time,
        buffer,
        sample_time: 1.0 / fps + pid_time + buffer,
    })
}

impl LoopTiming {
    pub fn stale_after(&self) -> f64 {
        2.0 * self.sample_time
    }
}

impl Default for LoopTiming {
    fn default() -> Self {
        compute_sample_time(120.0, 0.1, 0.01).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_rates() {
        let t = compute_sample_time(120.0, 0.1, 0.01).unwrap();
        let expected = 0.11 + 1.0 / 120.0;
        assert!((t.sample_time - expected).abs() < 1e-15);
        assert!((t.sample_time - 0.118_333_333).abs() < 1e-9);
    }

    #[test]
    fn single_term() {
        assert_eq!(compute_sample_time(1.0, 0.0, 0.0).unwrap().sample_time, 1.0);
    }

    #[test]
    fn guards() {
        assert_eq!(compute_sample_time(0.0, 0.1, 0.0), Err(ControlError::NonPositiveFps(0.0)));
        assert_eq!(compute_sample_time(10.0, -0.1, 0.0), Err(ControlError::NegativeTiming));
    }
}
