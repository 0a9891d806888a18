//! RRT* planning through hoops and waypoint generators for formations.

mod formation;
mod hoop;
mod path;
mod rrt;
mod scene;

pub use formation::{
    check_step, formation_lap, formation_waypoint, square_formation, FormationParams, FORMATION_STEPS,
};
pub use hoop::{hoop_traversal_plan, HoopLeg, HoopTraversalConfig, Leg};
pub use path::{
    path_length, resample, resample_checked, to_point, to_setpoint, PathPlan, MIN_WAYPOINTS, VALIDATION_STEP,
};
pub use rrt::{rrt_star, RrtConfig, RrtResult};
pub use scene::{collision_free, Aabb, Hoop, Scene3D};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("{0} point is in collision")]
    InvalidEndpoint(&'static str),
    #[error("no path found after {iterations} iterations")]
    NoPathFound { iterations: usize },
    #[error("resampled segment {segment} collides")]
    CollisionAfterResample { segment: usize },
    #[error("path needs at least 2 points, got {0}")]
    PathTooShort(usize),
    #[error("hoop {hoop}: {source}")]
    HoopFailed { hoop: usize, source: Box<PlanError> },
    #[error("no hoop with index {0}")]
    UnknownHoop(usize),
    #[error("square formation needs 3 drones, got {0}")]
    WrongDroneCount(usize),
    #[error("formation step {0} outside 0..=36")]
    FormationStepOutOfRange(u32),
    #[error("invalid scene: {0}")]
    InvalidScene(String),
}
