use serde::{Deserialize, Serialize};

use super::Vec3;

/// Marker position in the localization frame, expressed in WhyCon units.
///
/// The frame is the overhead camera's: x right, y down in the image, z away
/// from the lens. One unit is roughly 10 cm for the standard 55 mm marker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WhyConPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub id: u32,
    pub timestamp: f64,
}

impl WhyConPose {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self {
            x,
            y,
            z,
            id: 0,
            timestamp: 0.0,
        }
    }

    pub fn with_id(mut self, id: u32) -> Self {
        self.id = id;
        self
    }

    pub fn at(mut self, timestamp: f64) -> Self {
        self.timestamp = timestamp;
        self
    }

    pub fn position(&self) -> Vec3 {
        Vec3::new(self.x, self.y, self.z)
    }

    pub fn from_position(p: &Vec3) -> Self {
        Self::new(p.x, p.y, p.z)
    }

    pub fn distance(&self, other: &WhyConPose) -> f64 {
        (self.position() - other.position()).norm()
    }
}

/// Linear WhyCon-unit ↔ meter mapping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitScale {
    pub meters_per_unit: f64,
}

impl Default for UnitScale {
    fn default() -> Self {
        Self {
            meters_per_unit: 0.10,
        }
    }
}

impl UnitScale {
    pub fn units_to_meters(&self, pose: &WhyConPose) -> Vec3 {
        pose.position() * self.meters_per_unit
    }

    pub fn meters_to_units(&self, p: &Vec3) -> Vec3 {
        p / self.meters_per_unit
    }

    pub fn to_units(&self, meters: f64) -> f64 {
        meters / self.meters_per_unit
    }

    pub fn to_meters(&self, units: f64) -> f64 {
        units * self.meters_per_unit
    }
}

pub fn units_to_meters(pose: &WhyConPose) -> Vec3 {
    UnitScale::default().units_to_meters(pose)
}

pub fn meters_to_units(p: &Vec3) -> WhyConPose {
    WhyConPose::from_position(&UnitScale::default().meters_to_units(p))
}
