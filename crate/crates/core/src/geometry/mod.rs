//! Frames, camera projection, depth-reading correction and unit mapping.

mod camera;
mod ellipsoid;
mod transform;
mod units;

pub use camera::CameraModel;
pub use ellipsoid::{correct_z, fit_ellipsoid_z, EllipsoidZCorrection};
pub use transform::{apply_transform, HomogeneousTransform, Vec3};
pub use units::{meters_to_units, units_to_meters, UnitScale, WhyConPose};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("point is behind the camera (camera-frame z = {z})")]
    PointBehindCamera { z: f64 },
    #[error("undistortion did not converge for ({x}, {y})")]
    UndistortDiverged { x: f64, y: f64 },
    #[error("degenerate samples: {0}")]
    DegenerateSamples(String),
    #[error("({x}, {y}) lies outside the fitted ellipsoid footprint")]
    FitOutOfDomain { x: f64, y: f64 },
    #[error("invalid camera: {0}")]
    InvalidCamera(&'static str),
}
