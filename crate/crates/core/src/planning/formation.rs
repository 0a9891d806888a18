use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::control::Setpoint;

pub const FORMATION_STEPS: u32 = 36;

/// Parameters of the circular formation formula; angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormationParams {
    pub r: f64,
    pub dist_apart: f64,
    pub wc_id: u32,
    /// Step index; each step advances 10 degrees.
    pub a: u32,
    pub center_x: f64,
    pub center_y: f64,
    pub z: f64,
}

impl FormationParams {
    pub fn new(r: f64, dist_apart: f64, wc_id: u32, a: u32) -> Self {
        Self {
            r,
            dist_apart,
            wc_id,
            a,
            center_x: 0.0,
            center_y: 0.0,
            z: 0.0,
        }
    }

    pub fn angle_deg(&self) -> f64 {
        10.0 * self.a as f64 + self.dist_apart * self.wc_id as f64
    }
}

pub fn formation_waypoint(p: &FormationParams) -> Setpoint {
    let t = p.angle_deg().to_radians();
    Setpoint::new(p.center_x + p.r * t.sin(), p.center_y + p.r * t.cos(), p.z)
}

/// One lap of the formation for drone `wc_id`: steps 0 through 35.
pub fn formation_lap(base: &FormationParams, wc_id: u32) -> Vec<Setpoint> {
    (0..FORMATION_STEPS)
        .map(|a| formation_waypoint(&FormationParams { a, wc_id, ..*base }))
        .collect()
}

pub fn check_step(a: u32) -> Result<u32, PlanError> {
    if a > FORMATION_STEPS {
        Err(PlanError::FormationStepOutOfRange(a))
    } else {
        Ok(a)
    }
}

/// Two drones walk the square's vertices two apart while the third holds the center.
pub fn square_formation(side: f64, center: Setpoint, drones: usize) -> Result<Vec<Vec<Setpoint>>, PlanError> {
    if drones != 3 {
        return Err(PlanError::WrongDroneCount(drones));
    }
    let h = side / 2.0;
    let vertices = [(h, h), (h, -h), (-h, -h), (-h, h)]
        .map(|(dx, dy)| Setpoint::new(center.x + dx, center.y + dy, center.z));
    let walk = |shift: usize| (0..4).map(|k| vertices[(k + shift) % 4]).collect::<Vec<_>>();
    Ok(vec![walk(0), walk(2), vec![center; 4]])
}
