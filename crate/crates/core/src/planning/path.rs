use serde::{Deserialize, Serialize};

use super::{PlanError, Scene3D};
use crate::control::Setpoint;
use crate::geometry::Vec3;

pub const MIN_WAYPOINTS: usize = 50;
pub const VALIDATION_STEP: f64 = 0.05;

pub fn to_setpoint(p: &Vec3) -> Setpoint {
    Setpoint::new(p.x, p.y, p.z)
}

pub fn to_point(s: &Setpoint) -> Vec3 {
    Vec3::new(s.x, s.y, s.z)
}

pub fn path_length(points: &[Vec3]) -> f64 {
    points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPlan {
    pub waypoints: Vec<Setpoint>,
    /// Length of the planned path in WhyCon units.
    pub cost: f64,
    /// Wall-clock planning time in seconds.
    pub planning_time: f64,
    pub iterations: usize,
}

impl PathPlan {
    pub fn points(&self) -> Vec<Vec3> {
        self.waypoints.iter().map(to_point).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }
}

/// Arc-length-uniform resampling to `max(n, input count)` points.
pub fn resample(path: &[Vec3], n: usize) -> Result<Vec<Vec3>, PlanError> {
    if path.len() < 2 {
        return Err(PlanError::PathTooShort(path.len()));
    }
    let count = n.max(path.len()).max(2);
    let mut cumulative = Vec::with_capacity(path.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for w in path.windows(2) {
        acc += (w[1] - w[0]).norm();
        cumulative.push(acc);
    }
    let total = acc;
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for k in 0..count {
        if k == count - 1 {
            out.push(path[path.len() - 1]);
            break;
        }
        let s = total * k as f64 / (count - 1) as f64;
        while seg + 1 < path.len() - 1 && cumulative[seg + 1] < s {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let t = if len > 0.0 { (s - cumulative[seg]) / len } else { 0.0 };
        out.push(path[seg] + (path[seg + 1] - path[seg]) * t);
    }
    Ok(out)
}

/// Resample and re-check against the scene; on a corner-cut collision,
/// retry with twice as many points.
pub fn resample_checked(scene: &Scene3D, path: &[Vec3], n: usize, drone_radius: f64) -> Result<Vec<Vec3>, PlanError> {
    let mut count = n;
    for _ in 0..6 {
        let out = resample(path, count)?;
        match scene.first_collision(&out, drone_radius, VALIDATION_STEP) {
            None => return Ok(out),
            Some(_) => count *= 2,
        }
    }
    let out = resample(path, count)?;
    match scene.first_collision(&out, drone_radius, VALIDATION_STEP) {
        None => Ok(out),
        Some(segment) => Err(PlanError::CollisionAfterResample { segment }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn straight_segment() {
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(4.9, 0.0, 0.0);
        let out = resample(&[a, b], 50).unwrap();
        assert_eq!(out.len(), 50);
        assert_eq!(out[0], a);
        assert_eq!(out[49], b);
        for (k, p) in out.iter().enumerate() {
            assert!((p.x - 0.1 * k as f64).abs() < 1e-9);
            assert_eq!(p.y, 0.0);
        }
    }

    #[test]
    fn count_is_preserved_when_larger() {
        let path: Vec<Vec3> = (0..51).map(|k| Vec3::new(k as f64, (k % 2) as f64, 0.0)).collect();
        assert_eq!(resample(&path, 50).unwrap().len(), 51);
    }

    #[test]
    fn too_short() {
        assert_eq!(resample(&[Vec3::zeros()], 50), Err(PlanError::PathTooShort(1)));
    }

    proptest! {
        #[test]
        fn uniform_spacing(ax in -5.0..5.0f64, ay in -5.0..5.0f64, bx in -5.0..5.0f64, bz in -5.0..5.0f64, n in 2usize..200) {
            let a = Vec3::new(ax, ay, 0.0);
            let b = Vec3::new(bx, 1.0, bz);
            let out = resample(&[a, b], n).unwrap();
            let l = (b - a).norm() / (n - 1) as f64;
            for w in out.windows(2) {
                prop_assert!(((w[1] - w[0]).norm() - l).abs() < 1e-9);
            }
        }

        #[test]
        fn polyline_spacing(pts in proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64), 2..8), n in 2usize..120) {
            let path: Vec<Vec3> = pts.iter().map(|&(x, y, z)| Vec3::new(x, y, z)).collect();
            let out = resample(&path, n).unwrap();
            prop_assert_eq!(out.len(), n.max(path.len()));
            prop_assert_eq!(out[0], path[0]);
            prop_assert_eq!(*out.last().unwrap(), *path.last().unwrap());
            prop_assert!(path_length(&out) <= path_length(&path) + 1e-9);
        }
    }
}
