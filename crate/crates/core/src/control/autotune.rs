use serde::{Deserialize, Serialize};

use super::{pid_step, AxisGains, ControlError, FirstOrderPlant, PidGains, PidState, Plant};

pub const AXIS_NAMES: [&str; 3] = ["roll", "pitch", "throttle"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainRange {
    pub min: f64,
    pub max: f64,
}

impl GainRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    fn contains(&self, v: f64) -> bool {
        v >= self.min - 1e-9 && v <= self.max + 1e-9
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisRanges {
    pub kp: GainRange,
    pub ki: GainRange,
    pub kd: GainRange,
}

impl AxisRanges {
    pub fn new(kp: (f64, f64), ki: (f64, f64), kd: (f64, f64)) -> Self {
        Self {
            kp: GainRange::new(kp.0, kp.1),
            ki: GainRange::new(ki.0, ki.1),
            kd: GainRange::new(kd.0, kd.1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutotuneConfig {
    /// Roll, pitch and throttle ranges.
    pub ranges: [AxisRanges; 3],
    pub threshold: f64,
    pub threshold_prime: f64,
    pub kp_step: f64,
    pub ki_step: f64,
    pub kd_step: f64,
    pub max_iterations: usize,
    /// Late-trial error beyond this aborts the search.
    pub unstable_amplitude: f64,
}

impl AutotuneConfig {
    pub fn new(ranges: [AxisRanges; 3]) -> Self {
        Self {
            ranges,
            threshold: 1.0,
            threshold_prime: 0.5,
            kp_step: 0.1,
            ki_step: 0.5,
            kd_step: 0.05,
            max_iterations: 5000,
            unstable_amplitude: 100.0,
        }
    }

    /// Roll and pitch start at their minimum gains; throttle starts at maximum Kp.
    pub fn initial_gains(&self) -> AxisGains {
        let [r, p, t] = self.ranges;
        AxisGains {
            roll: PidGains::new(r.kp.min, r.ki.min, r.kd.min),
            pitch: PidGains::new(p.kp.min, p.ki.min, p.kd.min),
            throttle: PidGains::new(t.kp.max, t.ki.min, t.kd.min),
        }
    }
}

/// Error traces from one closed-loop trial, one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResponse {
    pub dt: f64,
    pub errors: [Vec<f64>; 3],
}

pub trait TuningPlant {
    fn trial(&mut self, gains: &AxisGains) -> TrialResponse;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisMetrics {
    /// Mean absolute error over the last quarter of the trial.
    pub steady_error: f64,
    /// Peak-to-peak error over the second half.
    pub spread: f64,
    /// The error never changed sign.
    pub overdamped: bool,
    /// Growth rate of the error envelope between the last two quarters.
    pub envelope_slope: f64,
    pub late_peak: f64,
    pub finite: bool,
}

pub fn axis_metrics(errors: &[f64], dt: f64) -> AxisMetrics {
    let n = errors.len();
    let finite = errors.iter().all(|e| e.is_finite());
    if n < 4 {
        let peak = errors.iter().fold(0.0f64, |m, e| m.max(e.abs()));
        return AxisMetrics {
            steady_error: peak,
            spread: 0.0,
            overdamped: true,
            envelope_slope: 0.0,
            late_peak: peak,
            finite,
        };
    }
    let q = n / 4;
    let last = &errors[n - q..];
    let third = &errors[n - 2 * q..n - q];
    let half = &errors[n / 2..];
    let peak = |s: &[f64]| s.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let steady_error = last.iter().map(|e| e.abs()).sum::<f64>() / last.len() as f64;
    let hi = half.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = half.iter().cloned().fold(f64::INFINITY, f64::min);
    let crossed = errors.windows(2).any(|w| w[0] * w[1] < 0.0 || (w[0] != 0.0 && w[1] == 0.0));
    AxisMetrics {
        steady_error,
        spread: hi - lo,
        overdamped: !crossed,
        envelope_slope: (peak(last) - peak(third)) / (q as f64 * dt),
        late_peak: peak(last),
        finite,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub gains: AxisGains,
    pub steady_error: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutotuneReport {
    pub gains: AxisGains,
    pub loop1_iterations: usize,
    pub loop2_iterations: usize,
    pub history: Vec<TrialRecord>,
}

impl AutotuneReport {
    pub fn final_errors(&self) -> [f64; 3] {
        self.history.last().map_or([f64::NAN; 3], |r| r.steady_error)
    }
}

struct Search<'a> {
    plant: &'a mut dyn TuningPlant,
    cfg: &'a AutotuneConfig,
    gains: [PidGains; 3],
    last_stable: AxisGains,
    history: Vec<TrialRecord>,
}

impl Search<'_> {
    fn run(&mut self) -> Result<[AxisMetrics; 3], ControlError> {
        if self.history.len() >= self.cfg.max_iterations {
            return Err(ControlError::IterationLimit(self.cfg.max_iterations));
        }
        let gains = AxisGains::from_array(self.gains);
        let resp = self.plant.trial(&gains);
        let m = [0, 1, 2].map(|i| axis_metrics(&resp.errors[i], resp.dt));
        if m.iter().any(|a| !a.finite || a.late_peak > self.cfg.unstable_amplitude) {
            return Err(ControlError::Unstable {
                last_stable: self.last_stable,
            });
        }
        self.last_stable = gains;
        self.history.push(TrialRecord {
            gains,
            steady_error: m.map(|a| a.steady_error),
        });
        Ok(m)
    }

    fn set(&mut self, axis: usize, gain: &'static str, value: f64) -> Result<(), ControlError> {
        let r = self.cfg.ranges[axis];
        let (range, slot) = match gain {
            "kp" => (r.kp, &mut self.gains[axis].kp),
            _ => (r.ki, &mut self.gains[axis].ki),
        };
        if !range.contains(value) {
            return Err(ControlError::RangeExhausted {
                axis: AXIS_NAMES[axis],
                gain,
                last: AxisGains::from_array(self.gains),
            });
        }
        *slot = value.clamp(range.min, range.max);
        Ok(())
    }

    /// Damping adjustment; the step grows with the envelope slope. Returns
    /// false when Kd is pinned at a range bound and did not move.
    fn adjust_kd(&mut self, axis: usize, m: &AxisMetrics) -> bool {
        let step = self.cfg.kd_step * (1.0 + m.envelope_slope.abs());
        let range = self.cfg.ranges[axis].kd;
        let kd = &mut self.gains[axis].kd;
        let before = *kd;
        *kd = if m.overdamped { *kd - step } else { *kd + step }.clamp(range.min, range.max);
        *kd != before
    }
}

/// Iterative feedback auto-tuning of the three parallel controllers.
///
/// Proportional gains move first until every axis is under `threshold`;
/// then derivative and integral gains are adjusted until every axis is
/// under `threshold_prime`. Only axes still above the relevant threshold
/// are adjusted on each iteration.
pub fn iterative_autotune(plant: &mut dyn TuningPlant, cfg: &AutotuneConfig) -> Result<AutotuneReport, ControlError> {
    let initial = cfg.initial_gains();
    let mut s = Search {
        plant,
        cfg,
        gains: initial.as_array(),
        last_stable: initial,
        history: Vec::new(),
    };
    let mut m = s.run()?;

    let mut loop1 = 0;
    while m.iter().any(|a| a.steady_error >= cfg.threshold) {
        for axis in 0..3 {
            if m[axis].steady_error >= cfg.threshold {
                let dir = if axis == 2 { -1.0 } else { 1.0 };
                s.set(axis, "kp", s.gains[axis].kp + dir * cfg.kp_step)?;
            }
        }
        m = s.run()?;
        loop1 += 1;
    }

    let mut loop2 = 0;
    while m.iter().any(|a| a.steady_error >= cfg.threshold_prime) {
        for axis in 0..3 {
            let a = m[axis];
            if a.steady_error < cfg.threshold_prime {
                continue;
            }
            let mut acted = false;
            if a.spread >= cfg.threshold {
                acted = s.adjust_kd(axis, &a);
            }
            if a.steady_error >= cfg.threshold {
                s.set(axis, "ki", s.gains[axis].ki + cfg.ki_step)?;
                s.adjust_kd(axis, &a);
                acted = true;
            }
            if !acted {
                let dir = if axis == 2 { -1.0 } else { 1.0 };
                s.set(axis, "kp", s.gains[axis].kp + dir * cfg.kp_step)?;
            }
        }
        m = s.run()?;
        loop2 += 1;
    }

    Ok(AutotuneReport {
        gains: AxisGains::from_array(s.gains),
        loop1_iterations: loop1,
        loop2_iterations: loop2,
        history: s.history,
    })
}

/// Three independent first-order axes under PID, each given a step.
#[derive(Debug, Clone)]
pub struct FirstOrderSurrogate {
    pub plants: [FirstOrderPlant; 3],
    pub step: f64,
    pub duration: f64,
    pub dt: f64,
}

impl FirstOrderSurrogate {
    pub fn new(gain: f64, tau: f64) -> Self {
        Self {
            plants: [0; 3].map(|_| FirstOrderPlant::new(gain, tau)),
            step: 10.0,
            duration: 10.0,
            dt: 0.01,
        }
    }
}

impl TuningPlant for FirstOrderSurrogate {
    fn trial(&mut self, gains: &AxisGains) -> TrialResponse {
        let n = (self.duration / self.dt).round() as usize;
        let g = gains.as_array();
        let errors = [0usize, 1, 2].map(|axis| {
            let plant = &mut self.plants[axis];
            plant.reset();
            let mut state = PidState {
                output_limit: f64::INFINITY,
                integral_limit: f64::INFINITY,
                ..PidState::default()
            };
            let mut trace = Vec::with_capacity(n);
            for _ in 0..n {
                let e = self.step - plant.output();
                trace.push(e);
                let (u, next) = pid_step(&g[axis], &state, e, self.dt);
                state = next;
                plant.step(u, self.dt);
            }
            trace
        });
        TrialResponse { dt: self.dt, errors }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn generous() -> AutotuneConfig {
        AutotuneConfig::new([AxisRanges::new((0.0, 30.0), (0.0, 50.0), (0.0, 2.0)); 3])
    }

    #[test]
    fn converges_on_first_order_surrogate() {
        let cfg = generous();
        let report = iterative_autotune(&mut FirstOrderSurrogate::new(1.0, 0.5), &cfg).unwrap();
        for e in report.final_errors() {
            assert!(e < cfg.threshold_prime, "{:?}", report.final_errors());
        }
        assert!(report.loop1_iterations > 0);
    }

    #[test]
    fn empty_ranges_exhaust() {
        let cfg = AutotuneConfig::new([AxisRanges::new((0.0, 0.0), (0.0, 0.0), (0.0, 0.0)); 3]);
        let err = iterative_autotune(&mut FirstOrderSurrogate::new(1.0, 0.5), &cfg).unwrap_err();
        assert!(matches!(err, ControlError::RangeExhausted { .. }), "{err:?}");
    }

    #[test]
    fn already_tuned_returns_initial() {
        let mut cfg = AutotuneConfig::new([AxisRanges::new((40.0, 40.0), (20.0, 30.0), (0.0, 1.0)); 3]);
        cfg.ranges[2] = AxisRanges::new((0.0, 40.0), (20.0, 30.0), (0.0, 1.0));
        let report = iterative_autotune(&mut FirstOrderSurrogate::new(1.0, 0.5), &cfg).unwrap();
        assert_eq!(report.gains, cfg.initial_gains());
        assert_eq!(report.loop1_iterations, 0);
        assert_eq!(report.loop2_iterations, 0);
    }

    #[test]
    fn metrics_classify_damping() {
        let decaying: Vec<f64> = (0..400).map(|k| 10.0 * (-(k as f64) * 0.02).exp()).collect();
        let m = axis_metrics(&decaying, 0.01);
        assert!(m.overdamped);
        let ringing: Vec<f64> = (0..400).map(|k| 10.0 * (k as f64 * 0.1).cos()).collect();
        let m = axis_metrics(&ringing, 0.01);
        assert!(!m.overdamped);
        assert!(m.spread > 19.0);
    }
}
