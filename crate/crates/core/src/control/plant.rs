use std::collections::VecDeque;

use super::{pid_step, PidGains, PidState};

/// A single-input single-output process driven in open loop by a tuner.
pub trait Plant {
    fn reset(&mut self);
    fn output(&self) -> f64;
    fn step(&mut self, input: f64, dt: f64);
}

/// K·e^(−Ls) / ((τ₁s + 1)(τ₂s + 1)), integrated with a fixed internal step.
#[derive(Debug, Clone)]
pub struct SecondOrderPlant {
    pub gain: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub dead_time: f64,
    x1: f64,
    x2: f64,
    delay: VecDeque<f64>,
    dt: f64,
}

impl SecondOrderPlant {
    /// The reference plant used for tuning checks: unit gain, lags of 1 s
    /// and 0.5 s, 1 s dead time.
    pub fn surrogate(dt: f64) -> Self {
        Self::new(1.0, 1.0, 0.5, 1.0, dt)
    }

    /// `dt` fixes the dead-time buffer resolution; `step` must be called with it.
    pub fn new(gain: f64, tau1: f64, tau2: f64, dead_time: f64, dt: f64) -> Self {
        let mut p = Self {
            gain,
            tau1,
            tau2,
            dead_time,
            x1: 0.0,
            x2: 0.0,
            delay: VecDeque::new(),
            dt,
        };
        p.reset();
        p
    }

    fn delay_len(&self) -> usize {
        (self.dead_time / self.dt).round() as usize
    }

    pub fn response(&self, omega: f64) -> (f64, f64) {
        let mag = self.gain / ((1.0 + (omega * self.tau1).powi(2)).sqrt() * (1.0 + (omega * self.tau2).powi(2)).sqrt());
        let phase = -omega * self.dead_time - (omega * self.tau1).atan() - (omega * self.tau2).atan();
        (mag, phase)
    }

    /// Phase-crossover frequency and ultimate gain from the frequency response.
    pub fn ultimate(&self) -> (f64, f64) {
        let (mut lo, mut hi) = (1e-6, 1e-3);
        while self.response(hi).1 > -std::f64::consts::PI {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.response(mid).1 > -std::f64::consts::PI {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let w = 0.5 * (lo + hi);
        (w, 1.0 / self.response(w).0)
    }
}

impl Plant for SecondOrderPlant {
    fn reset(&mut self) {
        self.x1 = 0.0;
        self.x2 = 0.0;
        self.delay = std::iter::repeat_n(0.0, self.delay_len()).collect();
    }

    fn output(&self) -> f64 {
        self.x2
    }

    fn step(&mut self, input: f64, dt: f64) {
        debug_assert!((dt - self.dt).abs() < 1e-12);
        self.delay.push_back(input);
        let u = self.delay.pop_front().unwrap_or(input);
        // exact zero-order-hold update of each lag
        let a1 = (-dt / self.tau1).exp();
        let a2 = (-dt / self.tau2).exp();
        let x1 = self.x1;
        self.x1 = a1 * x1 + (1.0 - a1) * self.gain * u;
        self.x2 = a2 * self.x2 + (1.0 - a2) * 0.5 * (x1 + self.x1);
    }
}

/// K / (τs + 1).
#[derive(Debug, Clone)]
pub struct FirstOrderPlant {
    pub gain: f64,
    pub tau: f64,
    y: f64,
}

impl FirstOrderPlant {
    pub fn new(gain: f64, tau: f64) -> Self {
        Self { gain, tau, y: 0.0 }
    }
}

impl Plant for FirstOrderPlant {
    fn reset(&mut self) {
        self.y = 0.0;
    }

    fn output(&self) -> f64 {
        self.y
    }

    fn step(&mut self, input: f64, dt: f64) {
        let a = (-dt / self.tau).exp();
        self.y = a * self.y + (1.0 - a) * self.gain * input;
    }
}

/// Closed-loop unit-feedback step response under PID; returns the output trace.
pub fn step_response(plant: &mut dyn Plant, gains: &PidGains, step: f64, duration: f64, dt: f64) -> Vec<f64> {
    plant.reset();
    let mut state = PidState {
        output_limit: f64::INFINITY,
        integral_limit: f64::INFINITY,
        ..PidState::default()
    };
    let n = (duration / dt).round() as usize;
    let mut trace = Vec::with_capacity(n);
    for _ in 0..n {
        let y = plant.output();
        trace.push(y);
        let (u, next) = pid_step(gains, &state, step - y, dt);
        state = next;
        plant.step(u, dt);
    }
    trace
}

/// Peak excursion beyond the setpoint as a fraction of the step size.
pub fn overshoot(trace: &[f64], step: f64) -> f64 {
    let peak = trace.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ((peak - step) / step).max(0.0)
}
