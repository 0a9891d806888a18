use serde::{Deserialize, Serialize};

use super::{ControlError, Setpoint};
use crate::geometry::WhyConPose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum WaypointEventKind {
    /// A new waypoint became the active setpoint.
    Activated,
    /// The waypoint was held within tolerance for the dwell time.
    Reached,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaypointEvent {
    pub index: usize,
    pub time: f64,
    pub kind: WaypointEventKind,
}

/// Steps through an ordered list of setpoints, holding each until the
/// drone has stayed within tolerance for the dwell time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointNavigator {
    waypoints: Vec<Setpoint>,
    pub tolerance: f64,
    pub dwell: f64,
    index: usize,
    inside_since: Option<f64>,
    finished: bool,
    started: bool,
}

pub fn waypoint_navigate(waypoints: Vec<Setpoint>, tolerance: f64, dwell: f64) -> Result<WaypointNavigator, ControlError> {
    WaypointNavigator::new(waypoints, tolerance, dwell)
}

impl WaypointNavigator {
    pub fn new(waypoints: Vec<Setpoint>, tolerance: f64, dwell: f64) -> Result<Self, ControlError> {
        if waypoints.is_empty() {
            return Err(ControlError::EmptyWaypointList);
        }
        Ok(Self {
            waypoints,
            tolerance,
            dwell,
            index: 0,
            inside_since: None,
            finished: false,
            started: false,
        })
    }

    pub fn current(&self) -> Setpoint {
        self.waypoints[self.index]
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    pub fn waypoints(&self) -> &[Setpoint] {
        &self.waypoints
    }

    /// True once the final waypoint has been reached.
    pub fn is_finished(&self) -> bool {
        self.finished
    }

    /// Feed the latest pose; returns the setpoint to track and any transitions.
    pub fn update(&mut self, pose: &WhyConPose, now: f64) -> (Setpoint, Vec<WaypointEvent>) {
        let mut events = Vec::new();
        if !self.started {
            self.started = true;
            events.push(WaypointEvent {
                index: 0,
                time: now,
                kind: WaypointEventKind::Activated,
            });
        }
        if self.finished {
            return (self.current(), events);
        }
        if self.current().distance(pose) < self.tolerance {
            let since = *self.inside_since.get_or_insert(now);
            if now - since >= self.dwell {
                events.push(WaypointEvent {
                    index: self.index,
                    time: now,
                    kind: WaypointEventKind::Reached,
                });
                self.inside_since = None;
                if self.index + 1 < self.waypoints.len() {
                    self.index += 1;
                    events.push(WaypointEvent {
                        index: self.index,
                        time: now,
                        kind: WaypointEventKind::Activated,
                    });
                } else {
                    self.finished = true;
                }
            }
        } else {
            self.inside_since = None;
        }
        (self.current(), events)
    }
}
