use std::collections::VecDeque;

use super::sim::{Directive, Mission, TickInput};
use crate::control::{RelayTuner, Setpoint, WaypointEventKind, WaypointNavigator};
use crate::geometry::WhyConPose;
use crate::marker::disambiguate_by_z;

/// Every drone holds a fixed setpoint.
pub struct HoldMission {
    pub setpoints: Vec<Setpoint>,
}

impl Mission for HoldMission {
    fn tick(&mut self, _: &TickInput, _: &mut [Vec<String>]) -> Vec<Directive> {
        self.setpoints.iter().map(|s| Directive::hold(*s)).collect()
    }
}

/// Drone 0 follows a waypoint list; the run ends after the last one is reached.
pub struct WaypointMission {
    pub nav: WaypointNavigator,
    /// Waypoint index and time of each arrival.
    pub reached: Vec<(usize, f64)>,
}

impl WaypointMission {
    pub fn new(nav: WaypointNavigator) -> Self {
        Self { nav, reached: Vec::new() }
    }
}

impl Mission for WaypointMission {
    fn tick(&mut self, input: &TickInput, events: &mut [Vec<String>]) -> Vec<Directive> {
        let sp = match input.feedback[0] {
            Some(pose) => {
                let (sp, evs) = self.nav.update(&pose, input.t);
                for e in evs {
                    if e.kind == WaypointEventKind::Reached {
                        self.reached.push((e.index, e.time));
                        events[0].push(format!("reached {}", e.index));
                    }
                }
                sp
            }
            None => self.nav.current(),
        };
        vec![Directive::hold(sp)]
    }

    fn finished(&self) -> bool {
        self.nav.is_finished()
    }
}

/// Bang-bang excitation on the pitch channel while roll and throttle hold.
pub struct RelayMission {
    pub setpoint: Setpoint,
    pub tuner: RelayTuner,
    pub settle: f64,
}

impl Mission for RelayMission {
    fn tick(&mut self, input: &TickInput, _: &mut [Vec<String>]) -> Vec<Directive> {
        let mut overrides = [None; 3];
        if input.t >= self.settle {
            if let Some(pose) = input.feedback[0] {
                // positive pitch moves the drone toward negative WhyCon x
                overrides[0] = Some(self.tuner.feed(input.t, -pose.x));
            }
        }
        vec![Directive::Track {
            setpoint: self.setpoint,
            overrides,
        }]
    }

    fn finished(&self) -> bool {
        self.tuner.is_done()
    }
}

/// Shared-step formation: a step advances once every drone is near its target.
pub struct FormationMission {
    /// Per-drone target sequences of equal length.
    pub targets: Vec<Vec<Setpoint>>,
    pub tolerance: f64,
    pub dwell: f64,
    pub step: usize,
    arrived_at: Option<f64>,
    pub completed: Vec<(usize, f64)>,
    done: bool,
}

impl FormationMission {
    pub fn new(targets: Vec<Vec<Setpoint>>, tolerance: f64, dwell: f64) -> Self {
        Self {
            targets,
            tolerance,
            dwell,
            step: 0,
            arrived_at: None,
            completed: Vec::new(),
            done: false,
        }
    }

    pub fn steps(&self) -> usize {
        self.targets.first().map_or(0, |t| t.len())
    }
}

impl Mission for FormationMission {
    fn tick(&mut self, input: &TickInput, events: &mut [Vec<String>]) -> Vec<Directive> {
        let k = self.step.min(self.steps().saturating_sub(1));
        let all_there = self
            .targets
            .iter()
            .zip(input.feedback)
            .all(|(seq, fb)| fb.is_some_and(|p| seq[k].distance(&p) < self.tolerance));
        if !self.done && all_there {
            let since = *self.arrived_at.get_or_insert(input.t);
            if input.t - since >= self.dwell {
                self.completed.push((k, input.t));
                events[0].push(format!("step {k}"));
                self.arrived_at = None;
                if k + 1 < self.steps() {
                    self.step = k + 1;
                } else {
                    self.done = true;
                }
            }
        } else {
            self.arrived_at = None;
        }
        let k = self.step.min(self.steps().saturating_sub(1));
        self.targets.iter().map(|seq| Directive::hold(seq[k])).collect()
    }

    fn finished(&self) -> bool {
        self.done
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LandingPhase {
    Approach,
    Descend,
    Landed,
}

/// Remaining height, WhyCon units, below which descent only advances while aligned.
const FINAL_APPROACH: f64 = 2.0;
/// Control ticks over which every axis must have converged before descent.
pub const HOVER_TICKS: usize = 16;

/// Follow the platform marker, hover over it, then descend onto it.
pub struct LandingMission {
    pub hover_height: f64,
    pub threshold: f64,
    pub hover_time: f64,
    pub descent_rate: f64,
    /// How far ahead of the latest observation the setpoint is placed, seconds.
    pub lead: f64,
    pub phase: LandingPhase,
    /// Filtered platform position and the time of its latest observation.
    platform: Option<WhyConPose>,
    velocity: [f64; 2],
    platform_id: Option<u32>,
    descent_z: f64,
    committed: bool,
    last_t: Option<f64>,
    recent: VecDeque<f64>,
    /// Absolute x, y and z errors over the latest hover ticks.
    hover: VecDeque<[f64; 3]>,
    pub descent_start: Option<f64>,
}

impl LandingMission {
    pub fn new(hover_height: f64, threshold: f64, hover_time: f64, descent_rate: f64, platform: WhyConPose) -> Self {
        Self {
            hover_height,
            threshold,
            hover_time,
            descent_rate,
            lead: 0.0,
            phase: LandingPhase::Approach,
            platform: Some(platform),
            velocity: [0.0; 2],
            platform_id: Some(platform.id),
            descent_z: f64::NAN,
            committed: false,
            last_t: None,
            recent: VecDeque::new(),
            hover: VecDeque::new(),
            descent_start: None,
        }
    }

    /// Filtered platform position extrapolated to `t` plus the lead time.
    pub fn platform_estimate(&self, t: f64) -> Option<WhyConPose> {
        self.platform.map(|p| {
            let dt = (t - p.timestamp).max(0.0) + self.lead;
            WhyConPose {
                x: p.x + self.velocity[0] * dt,
                y: p.y + self.velocity[1] * dt,
                ..p
            }
        })
    }

    fn observe(&mut self, input: &TickInput, drone_id: u32, events: &mut Vec<String>) {
        let tracked = self.platform_id.and_then(|id| input.published.iter().find(|p| p.id == id && id != drone_id));
        let fresh = match (tracked, input.published) {
            (Some(p), _) => Some(*p),
            (None, [a, b]) => disambiguate_by_z(&[*a, *b]).ok().map(|(_, platform)| platform),
            (None, [a]) if a.id != drone_id => Some(*a),
            _ => None,
        };
        let Some(p) = fresh else {
            return;
        };
        if self.platform_id != Some(p.id) {
            events.push(format!("platform track {:?}->{}", self.platform_id, p.id));
            self.platform_id = Some(p.id);
        }
        let Some(prev) = self.platform else {
            self.platform = Some(p);
            return;
        };
        let dt = p.timestamp - prev.timestamp;
        if dt <= 1e-6 {
            return;
        }
        // alpha-beta filter on the horizontal position
        let (alpha, beta) = (0.3, 0.05);
        let predicted = [prev.x + self.velocity[0] * dt, prev.y + self.velocity[1] * dt];
        let residual = [p.x - predicted[0], p.y - predicted[1]];
        for k in 0..2 {
            self.velocity[k] += beta / dt * residual[k];
        }
        self.platform = Some(WhyConPose {
            x: predicted[0] + alpha * residual[0],
            y: predicted[1] + alpha * residual[1],
            ..p
        });
    }
}

impl Mission for LandingMission {
    fn tick(&mut self, input: &TickInput, events: &mut [Vec<String>]) -> Vec<Directive> {
        let dt = self.last_t.map_or(0.0, |t| input.t - t);
        self.last_t = Some(input.t);
        if input.touchdown.is_some() {
            if self.phase != LandingPhase::Landed {
                events[0].push("touchdown".into());
            }
            self.phase = LandingPhase::Landed;
            return vec![Directive::Send(crate::vehicle::CommandMessage::disarm(0))];
        }
        self.observe(input, 0, &mut events[0]);
        let Some(platform) = self.platform_estimate(input.t) else {
            return vec![Directive::Idle];
        };
        let hover_z = platform.z - self.hover_height;
        let horizontal = input.feedback[0].map(|d| ((d.x - platform.x).powi(2) + (d.y - platform.y).powi(2)).sqrt());
        self.recent.push_back(horizontal.unwrap_or(f64::INFINITY));
        while self.recent.len() > 8 {
            self.recent.pop_front();
        }
        let mean = self.recent.iter().sum::<f64>() / self.recent.len() as f64;
        let axes = input.feedback[0].map_or([f64::INFINITY; 3], |d| {
            [(d.x - platform.x).abs(), (d.y - platform.y).abs(), (d.z - hover_z).abs()]
        });
        self.hover.push_back(axes);
        while self.hover.len() > HOVER_TICKS {
            self.hover.pop_front();
        }
        let converged = self.hover.len() == HOVER_TICKS
            && (0..3).all(|k| self.hover.iter().map(|e| e[k]).sum::<f64>() / (HOVER_TICKS as f64) < self.threshold);
        match self.phase {
            LandingPhase::Approach => {
                if input.t >= self.hover_time && converged && input.expected_count >= 2 {
                    self.phase = LandingPhase::Descend;
                    self.descent_z = hover_z;
                    self.descent_start = Some(input.t);
                    events[0].push("descend".into());
                }
            }
            LandingPhase::Descend => {
                let floor = platform.z + 0.5;
                let near = platform.z - self.descent_z < FINAL_APPROACH;
                let aligned = self.recent.iter().rev().take(2).all(|&h| h < 0.5 * self.threshold);
                if self.committed || (near && aligned) {
                    self.committed = true;
                    self.descent_z = floor;
                } else if mean < self.threshold && !near {
                    self.descent_z = (self.descent_z + self.descent_rate * dt).min(floor);
                }
            }
            LandingPhase::Landed => {}
        }
        let z = if self.phase == LandingPhase::Descend { self.descent_z } else { hover_z };
        vec![Directive::hold(Setpoint::new(platform.x, platform.y, z))]
    }

    fn finished(&self) -> bool {
        self.phase == LandingPhase::Landed
    }
}
