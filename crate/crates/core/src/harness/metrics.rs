use serde::{Deserialize, Serialize};

use super::log::{LogRow, RunLog};
use super::HarnessError;

pub const METRICS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxisSummary {
    pub min: f64,
    pub max: f64,
    pub max_abs: f64,
    pub mean_abs: f64,
    pub samples: usize,
}

impl AxisSummary {
    pub fn from_values(values: impl IntoIterator<Item = f64>) -> Self {
        let mut s = Self {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            ..Self::default()
        };
        let mut sum = 0.0;
        for v in values {
            s.min = s.min.min(v);
            s.max = s.max.max(v);
            s.max_abs = s.max_abs.max(v.abs());
            sum += v.abs();
            s.samples += 1;
        }
        if s.samples == 0 {
            return Self::default();
        }
        s.mean_abs = sum / s.samples as f64;
        s
    }

    /// Fraction of samples inside `[lo, hi]`.
    pub fn within(values: &[f64], lo: f64, hi: f64) -> f64 {
        if values.is_empty() {
            return 1.0;
        }
        values.iter().filter(|v| **v >= lo && **v <= hi).count() as f64 / values.len() as f64
    }
}

/// Response of one axis to its first setpoint change.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSummary {
    pub axis: usize,
    pub start: f64,
    pub from: f64,
    pub to: f64,
    /// Peak travel beyond the new setpoint over the step magnitude.
    pub overshoot: f64,
    /// Time after the change until the response stays within 5% of the step.
    pub settle_time: Option<f64>,
}

/// Statistics derived from the log alone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogSummary {
    pub rows: usize,
    pub drones: usize,
    pub span: f64,
    /// Mean control ticks per second for one drone.
    pub control_rate: f64,
    /// Estimate minus setpoint, per axis, over all drones.
    pub error: [AxisSummary; 3],
    /// Truth minus setpoint, per axis, over all drones.
    pub truth_error: [AxisSummary; 3],
    pub steps: Vec<StepSummary>,
    /// First time drone 0 had no fresh camera pose while outside the field of view.
    pub out_of_frame_time: Option<f64>,
}

pub fn overshoot(times: &[f64], values: &[f64], from: f64, to: f64) -> StepSummary {
    let step = to - from;
    let mut peak = 0.0f64;
    for v in values {
        peak = peak.max((v - to) * step.signum());
    }
    let band = 0.05 * step.abs();
    let start = times.first().copied().unwrap_or(0.0);
    let settle_time = match values.iter().rposition(|v| (v - to).abs() > band) {
        None => Some(0.0),
        Some(k) if k + 1 < values.len() => Some(times[k + 1] - start),
        Some(_) => None,
    };
    StepSummary {
        axis: 0,
        start,
        from,
        to,
        overshoot: if step == 0.0 { 0.0 } else { peak / step.abs() },
        settle_time,
    }
}

fn first_step(rows: &[&LogRow], axis: usize) -> Option<StepSummary> {
    let sp: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter_map(|(k, r)| r.setpoint.map(|s| (k, s[axis])))
        .collect();
    let (_, first) = *sp.first()?;
    let change = sp.iter().position(|&(_, v)| (v - first).abs() > 1e-9)?;
    let (k0, to) = sp[change];
    let end = sp[change..]
        .iter()
        .find(|&&(_, v)| (v - to).abs() > 1e-9)
        .map_or(rows.len(), |&(k, _)| k);
    let times: Vec<f64> = rows[k0..end].iter().map(|r| r.t).collect();
    let values: Vec<f64> = rows[k0..end].iter().map(|r| r.truth[axis]).collect();
    let mut s = overshoot(&times, &values, first, to);
    s.axis = axis;
    Some(s)
}

pub fn summarize(log: &RunLog) -> Result<LogSummary, HarnessError> {
    if log.is_empty() {
        return Err(HarnessError::EmptyLog);
    }
    let drones = log.drone_count();
    let first = log.rows.first().map_or(0.0, |r| r.t);
    let last = log.rows.last().map_or(0.0, |r| r.t);
    let span = last - first;
    let ticks0 = log.drone(0).count();
    let control_rate = if span > 0.0 { (ticks0.saturating_sub(1)) as f64 / span } else { 0.0 };
    let axis = |f: &dyn Fn(&LogRow) -> Option<[f64; 3]>, k: usize| {
        AxisSummary::from_values(log.rows.iter().filter_map(|r| f(r).map(|e| e[k])))
    };
    let error = [0, 1, 2].map(|k| axis(&|r: &LogRow| r.error, k));
    let truth_error = [0, 1, 2].map(|k| axis(&|r: &LogRow| r.truth_error(), k));
    let rows0: Vec<&LogRow> = log.drone(0).collect();
    let steps = (0..3).filter_map(|k| first_step(&rows0, k)).collect();
    let out_of_frame_time = rows0.iter().find(|r| !r.visible && !r.in_fov).map(|r| r.t);
    Ok(LogSummary {
        rows: log.rows.len(),
        drones,
        span,
        control_rate,
        error,
        truth_error,
        steps,
        out_of_frame_time,
    })
}

/// Everything written to the metrics JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub schema_version: u32,
    pub scenario: String,
    pub seed: u64,
    pub duration: f64,
    pub camera_fps: f64,
    pub sample_time: f64,
    pub success: bool,
    pub summary: Option<LogSummary>,
    pub landing_offset: Option<f64>,
    /// Scenario-specific results.
    pub details: serde_json::Value,
}

impl Metrics {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metrics serialize")
    }
}
