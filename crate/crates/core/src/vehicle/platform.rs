use serde::{Deserialize, Serialize};

use super::VehicleError;
use crate::geometry::Vec3;

/// Ground robot carrying the landing target, driven at constant speed
/// around a closed polyline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformState {
    pub position: Vec3,
    pub heading: f64,
    pub speed: f64,
    /// Closed path in world meters; the last vertex connects back to the first.
    pub path: Vec<Vec3>,
    /// Arc length travelled along the path, wrapped to `[0, length)`.
    pub arc: f64,
}

impl PlatformState {
    pub fn new(path: Vec<Vec3>, speed: f64, height: f64) -> Result<Self, VehicleError> {
        let path: Vec<Vec3> = path.into_iter().map(|p| Vec3::new(p.x, p.y, height)).collect();
        let mut s = Self {
            position: Vec3::zeros(),
            heading: 0.0,
            speed,
            path,
            arc: 0.0,
        };
        s.place()?;
        Ok(s)
    }

    /// Regular polygon approximating a circle.
    pub fn circle(center: Vec3, radius: f64, sides: usize, speed: f64) -> Result<Self, VehicleError> {
        let path = (0..sides)
            .map(|k| {
                let a = k as f64 * std::f64::consts::TAU / sides as f64;
                center + Vec3::new(radius * a.cos(), radius * a.sin(), 0.0)
            })
            .collect();
        Self::new(path, speed, center.z)
    }

    pub fn length(&self) -> f64 {
        segments(&self.path).map(|(a, b)| (b - a).norm()).sum()
    }

    fn place(&mut self) -> Result<(), VehicleError> {
        let total = self.length();
        if self.path.len() < 2 || !(total > 0.0) {
            return Err(VehicleError::EmptyPath);
        }
        self.arc = self.arc.rem_euclid(total);
        let mut remaining = self.arc;
        for (a, b) in segments(&self.path) {
            let len = (b - a).norm();
            if len == 0.0 {
                continue;
            }
            if remaining <= len {
                let dir = (b - a) / len;
                self.position = a + dir * remaining;
                self.heading = dir.y.atan2(dir.x);
                return Ok(());
            }
            remaining -= len;
        }
        self.position = self.path[0];
        Ok(())
    }

    pub fn velocity(&self) -> Vec3 {
        Vec3::new(self.heading.cos(), self.heading.sin(), 0.0) * self.speed
    }
}

fn segments(path: &[Vec3]) -> impl Iterator<Item = (Vec3, Vec3)> + '_ {
    (0..path.len()).map(move |i| (path[i], path[(i + 1) % path.len()]))
}

pub fn step_platform(p: &PlatformState, dt: f64) -> Result<PlatformState, VehicleError> {
    let mut next = p.clone();
    next.arc += p.speed * dt;
    next.place()?;
    Ok(next)
}

/// Distance from `q` to the closed polyline.
pub fn distance_to_path(path: &[Vec3], q: &Vec3) -> f64 {
    segments(path)
        .map(|(a, b)| {
            let ab = b - a;
            let t = if ab.norm_squared() > 0.0 {
                ((q - a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0)
            } else {
                0.0
            };
            (a + ab * t - q).norm()
        })
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec3> {
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ]
    }

    #[test]
    fn zero_speed_is_stationary() {
        let p = PlatformState::new(square(), 0.0, 0.1).unwrap();
        let q = step_platform(&p, 1.0).unwrap();
        assert_eq!(p.position, q.position);
    }

    #[test]
    fn full_lap_returns_to_start() {
        let mut p = PlatformState::circle(Vec3::new(0.2, -0.1, 0.1), 0.5, 24, 0.07).unwrap();
        let start = p.position;
        let lap = p.length() / p.speed;
        let steps = 1000;
        for _ in 0..steps {
            p = step_platform(&p, lap / steps as f64).unwrap();
        }
        assert!((p.position - start).norm() < 1e-6);
    }

    #[test]
    fn stays_on_polyline_across_corners() {
        let mut p = PlatformState::new(square(), 0.3, 0.1).unwrap();
        let flat: Vec<Vec3> = square().iter().map(|v| Vec3::new(v.x, v.y, 0.1)).collect();
        for _ in 0..200 {
            p = step_platform(&p, 0.37).unwrap();
            assert!(distance_to_path(&flat, &p.position) < 1e-9);
            assert_eq!(p.position.z, 0.1);
        }
    }

    #[test]
    fn empty_path() {
        assert_eq!(PlatformState::new(vec![], 1.0, 0.0).unwrap_err(), VehicleError::EmptyPath);
        assert_eq!(
            PlatformState::new(vec![Vec3::zeros(), Vec3::zeros()], 1.0, 0.0).unwrap_err(),
            VehicleError::EmptyPath
        );
    }
}
