//! Synthetic concentric-ring markers: rendering, flood-fill detection,
//! position recovery and multi-marker identity tracking.

mod detect;
mod frame;
mod localize;
mod render;
mod tracker;

use serde::{Deserialize, Serialize};

pub use detect::{Detection, Detector};
pub use frame::Frame;
pub use localize::localize;
pub use render::{render, MarkerPlacement, RenderStyle, Renderer};
pub use tracker::{disambiguate_by_z, Ambiguity, CountChange, Track, TrackOutcome, TrackerState};

use crate::geometry::GeometryError;

/// Physical marker dimensions in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkerSpec {
    pub outer_diameter: f64,
    pub inner_diameter: f64,
}

impl Default for MarkerSpec {
    fn default() -> Self {
        Self {
            outer_diameter: 0.055,
            inner_diameter: 0.02,
        }
    }
}

impl MarkerSpec {
    pub fn validate(&self) -> Result<(), MarkerError> {
        if 0.0 < self.inner_diameter && self.inner_diameter < self.outer_diameter {
            Ok(())
        } else {
            Err(MarkerError::InvalidSpec)
        }
    }

    pub fn ratio(&self) -> f64 {
        self.inner_diameter / self.outer_diameter
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MarkerError {
    #[error("detection has zero outer radius")]
    ZeroRadius,
    #[error("marker depths are too close to tell apart")]
    EqualZ,
    #[error("expected exactly two poses, got {0}")]
    WrongPoseCount(usize),
    #[error("detection {detection} tied between tracks; track {winner} kept it")]
    AmbiguousAssignment { detection: usize, winner: u32 },
    #[error("marker diameters must satisfy 0 < inner < outer")]
    InvalidSpec,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Detect with the default detector, bounded by the tracker's current limit.
pub fn detect(frame: &Frame, tracker: &TrackerState) -> Vec<Detection> {
    Detector::default().detect(frame, tracker.detection_limit())
}
