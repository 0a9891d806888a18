use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ControlError, PidGains, Plant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelayTuneResult {
    pub ku: f64,
    pub tu: f64,
    /// Relay amplitude in controller output units.
    pub d: f64,
    /// Oscillation amplitude about the setpoint.
    pub a: f64,
}

impl RelayTuneResult {
    pub fn new(d: f64, a: f64, tu: f64) -> Self {
        Self {
            ku: 4.0 * d / (PI * a),
            tu,
            d,
            a,
        }
    }

    /// Ultimate gain of a relay that switches at `±h` around the setpoint.
    pub fn with_hysteresis(d: f64, a: f64, h: f64, tu: f64) -> Self {
        Self {
            ku: 4.0 * d / (PI * (a * a - h * h).max(0.0).sqrt()),
            tu,
            d,
            a,
        }
    }

    /// For applying the gain table to known ultimate values.
    pub fn from_ultimate(ku: f64, tu: f64) -> Self {
        Self {
            ku,
            tu,
            d: ku * PI / 4.0,
            a: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelayConfig {
    pub setpoint: f64,
    pub amplitude: f64,
    /// Output level the relay switches around.
    pub bias: f64,
    pub cycles: usize,
    /// Leading oscillations treated as transient.
    pub discard: usize,
    pub dt: f64,
    pub timeout: f64,
    /// Half-width of the dead band around the setpoint in which the relay
    /// keeps its previous output.
    pub hysteresis: f64,
}

impl Default for RelayConfig {
    fn default() -> Self {
        Self {
            setpoint: 0.0,
            amplitude: 1.0,
            bias: 0.0,
            cycles: 5,
            discard: 2,
            dt: 0.01,
            timeout: 120.0,
            hysteresis: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub period: f64,
    pub amplitude: f64,
}

/// Bang-bang relay fed one measurement at a time.
#[derive(Debug, Clone)]
pub struct RelayTuner {
    pub config: RelayConfig,
    prev: Option<(f64, f64)>,
    high: Option<bool>,
    last_up: Option<f64>,
    max: f64,
    min: f64,
    oscillations: Vec<Oscillation>,
}

impl RelayTuner {
    pub fn new(config: RelayConfig) -> Self {
        Self {
            config,
            prev: None,
            high: None,
            last_up: None,
            max: f64::NEG_INFINITY,
            min: f64::INFINITY,
            oscillations: Vec::new(),
        }
    }

    /// Record a measurement and return the relay output to apply.
    pub fn feed(&mut self, t: f64, y: f64) -> f64 {
        let h = self.config.hysteresis;
        let e = y - self.config.setpoint;
        let was_high = *self.high.get_or_insert(e < 0.0);
        let high = if was_high { e < h } else { e < -h };
        if was_high && !high {
            let tc = match self.prev {
                Some((tp, yp)) if yp - self.config.setpoint < h => {
                    let ep = yp - self.config.setpoint;
                    tp + (t - tp) * (h - ep) / (e - ep)
                }
                _ => t,
            };
            if let Some(up) = self.last_up {
                self.oscillations.push(Oscillation {
                    period: tc - up,
                    amplitude: 0.5 * (self.max - self.min),
                });
            }
            self.last_up = Some(tc);
            self.max = f64::NEG_INFINITY;
            self.min = f64::INFINITY;
        }
        self.high = Some(high);
        if self.last_up.is_some() {
            self.max = self.max.max(y);
            self.min = self.min.min(y);
        }
        self.prev = Some((t, y));
        if high {
            self.config.bias + self.config.amplitude
        } else {
            self.config.bias - self.config.amplitude
        }
    }

    pub fn oscillations(&self) -> &[Oscillation] {
        &self.oscillations
    }

    pub fn is_done(&self) -> bool {
        self.oscillations.len() >= self.config.cycles
    }

    pub fn result(&self) -> Result<RelayTuneResult, ControlError> {
        let used = self.config.cycles.saturating_sub(self.config.discard).max(1);
        if !self.is_done() || self.oscillations.len() < used {
            return Err(ControlError::NoOscillation {
                observed: self.oscillations.len(),
                required: self.config.cycles,
            });
        }
        let tail = &self.oscillations[self.oscillations.len() - used..];
        let n = tail.len() as f64;
        let a = tail.iter().map(|o| o.amplitude).sum::<f64>() / n;
        let tu = tail.iter().map(|o| o.period).sum::<f64>() / n;
        if !(a > 0.0) {
            return Err(ControlError::NoOscillation {
                observed: 0,
                required: self.config.cycles,
            });
        }
        if self.config.hysteresis > 0.0 {
            if a <= self.config.hysteresis {
                return Err(ControlError::NoOscillation {
                    observed: 0,
                    required: self.config.cycles,
                });
            }
            return Ok(RelayTuneResult::with_hysteresis(self.config.amplitude, a, self.config.hysteresis, tu));
        }
        Ok(RelayTuneResult::new(self.config.amplitude, a, tu))
    }
}

/// Drive `plant` with a relay until enough oscillations are seen.
pub fn relay_tune(plant: &mut dyn Plant, config: RelayConfig) -> Result<RelayTuneResult, ControlError> {
    plant.reset();
    let mut tuner = RelayTuner::new(config);
    let steps = (config.timeout / config.dt).ceil() as usize;
    for k in 0..steps {
        let t = k as f64 * config.dt;
        let u = tuner.feed(t, plant.output());
        if tuner.is_done() {
            break;
        }
        plant.step(u, config.dt);
    }
    tuner.result()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ControllerType {
    P,
    PI,
    PD,
    ClassicPid,
    PessenIntegral,
    SomeOvershoot,
    NoOvershoot,
}

impl ControllerType {
    pub const ALL: [ControllerType; 7] = [
        ControllerType::P,
        ControllerType::PI,
        ControllerType::PD,
        ControllerType::ClassicPid,
        ControllerType::PessenIntegral,
        ControllerType::SomeOvershoot,
        ControllerType::NoOvershoot,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ControllerType::P => "P",
            ControllerType::PI => "PI",
            ControllerType::PD => "PD",
            ControllerType::ClassicPid => "Classic PID",
            ControllerType::PessenIntegral => "Pessen Integral rule",
            ControllerType::SomeOvershoot => "Some overshoot",
            ControllerType::NoOvershoot => "No overshoot",
        }
    }

    /// Kp as a multiple of Ku, and Ti, Td as multiples of Tu.
    pub fn row(&self) -> (f64, Option<f64>, Option<f64>) {
        match self {
            ControllerType::P => (0.5, None, None),
            ControllerType::PI => (0.5, Some(1.0 / 1.25), None),
            ControllerType::PD => (0.8, None, Some(1.0 / 8.0)),
            ControllerType::ClassicPid => (0.6, Some(0.5), Some(1.0 / 8.0)),
            ControllerType::PessenIntegral => (0.7, Some(1.0 / 2.5), Some(3.0 / 20.0)),
            ControllerType::SomeOvershoot => (0.33, Some(0.5), Some(1.0 / 3.0)),
            ControllerType::NoOvershoot => (0.2, Some(0.5), Some(1.0 / 3.0)),
        }
    }
}

impl fmt::Display for ControllerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ControllerType {
    type Err = ControlError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s.chars().filter(|c| c.is_alphanumeric()).collect::<String>().to_lowercase();
        let found = match key.as_str() {
            "p" => ControllerType::P,
            "pi" => ControllerType::PI,
            "pd" => ControllerType::PD,
            "classicpid" | "pid" => ControllerType::ClassicPid,
            "pessenintegralrule" | "pessenintegral" | "pessen" => ControllerType::PessenIntegral,
            "someovershoot" => ControllerType::SomeOvershoot,
            "noovershoot" => ControllerType::NoOvershoot,
            _ => return Err(ControlError::UnknownControllerType(s.to_string())),
        };
        Ok(found)
    }
}

pub fn zn_gains(result: &RelayTuneResult, controller: ControllerType) -> PidGains {
    let (kp, ti, td) = controller.row();
    let kp = kp * result.ku;
    PidGains::from_time_constants(kp, ti.map(|f| f * result.tu), td.map(|f| f * result.tu))
}

pub fn zn_gains_named(result: &RelayTuneResult, controller: &str) -> Result<PidGains, ControlError> {
    Ok(zn_gains(result, controller.parse()?))
}
