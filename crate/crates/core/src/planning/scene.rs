use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vec3,
    pub max: Vec3,
}

impl Aabb {
    pub fn new(min: Vec3, max: Vec3) -> Self {
        Self { min, max }
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| !(self.max[i] > self.min[i]))
    }

    pub fn volume(&self) -> f64 {
        (self.max - self.min).iter().product()
    }

    /// Euclidean distance from `p` to the box, zero inside.
    pub fn distance(&self, p: &Vec3) -> f64 {
        let d = Vec3::from_fn(|i, _| (self.min[i] - p[i]).max(0.0).max(p[i] - self.max[i]));
        d.norm()
    }

    pub fn clamp(&self, p: &Vec3) -> Vec3 {
        Vec3::from_fn(|i, _| p[i].clamp(self.min[i], self.max[i]))
    }
}

/// A ring the drone must fly through: a torus whose opening has radius
/// `inner_radius`, set in a wall that blocks the rest of its plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hoop {
    pub center: Vec3,
    pub axis: Vec3,
    pub inner_radius: f64,
    pub tube_radius: f64,
    /// Outer edge of the wall around the ring; `None` fills the whole plane.
    #[serde(default)]
    pub wall_radius: Option<f64>,
}

impl Hoop {
    pub fn new(center: Vec3, axis: Vec3, inner_radius: f64, tube_radius: f64) -> Self {
        Self {
            center,
            axis: axis.normalize(),
            inner_radius,
            tube_radius,
            wall_radius: None,
        }
    }

    /// Radius of the tube's center circle.
    pub fn ring_radius(&self) -> f64 {
        self.inner_radius + self.tube_radius
    }

    /// Axial offset and radial distance of `p` from the hoop axis.
    pub fn cylindrical(&self, p: &Vec3) -> (f64, f64) {
        let d = p - self.center;
        let h = d.dot(&self.axis);
        (h, (d - self.axis * h).norm())
    }

    pub fn torus_distance(&self, p: &Vec3) -> f64 {
        let (h, rho) = self.cylindrical(p);
        ((rho - self.ring_radius()).powi(2) + h * h).sqrt() - self.tube_radius
    }

    pub fn wall_distance(&self, p: &Vec3) -> f64 {
        let (h, rho) = self.cylindrical(p);
        let outer = self.wall_radius.unwrap_or(f64::INFINITY);
        let dr = (self.ring_radius() - rho).max(rho - outer).max(0.0);
        let dh = (h.abs() - self.tube_radius).max(0.0);
        (dr * dr + dh * dh).sqrt()
    }

    pub fn clearance(&self, p: &Vec3) -> f64 {
        self.torus_distance(p).min(self.wall_distance(p))
    }

    pub fn entry(&self, standoff: f64) -> Vec3 {
        self.center - self.axis * standoff
    }

    pub fn exit(&self, standoff: f64) -> Vec3 {
        self.center + self.axis * standoff
    }

    /// Whether the segment crosses the hoop plane inside the opening.
    pub fn passes_through(&self, a: &Vec3, b: &Vec3) -> bool {
        let ha = (a - self.center).dot(&self.axis);
        let hb = (b - self.center).dot(&self.axis);
        if ha == hb || ha.signum() == hb.signum() && ha != 0.0 && hb != 0.0 {
            return false;
        }
        let t = ha / (ha - hb);
        let q = a + (b - a) * t;
        self.cylindrical(&q).1 < self.inner_radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene3D {
    pub bounds: Aabb,
    #[serde(default)]
    pub hoops: Vec<Hoop>,
    #[serde(default)]
    pub boxes: Vec<Aabb>,
}

impl Scene3D {
    pub fn empty(bounds: Aabb) -> Self {
        Self {
            bounds,
            hoops: Vec::new(),
            boxes: Vec::new(),
        }
    }

    pub fn validate(&self, drone_radius: f64) -> Result<(), PlanError> {
        if self.bounds.is_empty() {
            return Err(PlanError::InvalidScene("bounds are empty".into()));
        }
        for (i, h) in self.hoops.iter().enumerate() {
            if !(h.inner_radius > drone_radius) {
                return Err(PlanError::InvalidScene(format!(
                    "hoop {i} opening {} does not clear drone radius {drone_radius}",
                    h.inner_radius
                )));
            }
        }
        Ok(())
    }

    /// Distance to the nearest obstacle; negative when inside the bounds check fails.
    pub fn clearance(&self, p: &Vec3) -> f64 {
        if !self.bounds.contains(p) {
            return f64::NEG_INFINITY;
        }
        let hoops = self.hoops.iter().map(|h| h.clearance(p));
        let boxes = self.boxes.iter().map(|b| b.distance(p));
        hoops.chain(boxes).fold(f64::INFINITY, f64::min)
    }

    pub fn collision_free(&self, p: &Vec3, drone_radius: f64) -> bool {
        self.clearance(p) > drone_radius
    }

    /// Sampled segment check; every sample must clear `drone_radius`.
    pub fn segment_free(&self, a: &Vec3, b: &Vec3, drone_radius: f64, step: f64) -> bool {
        let n = ((b - a).norm() / step).ceil().max(1.0) as usize;
        (0..=n).all(|k| self.collision_free(&(a + (b - a) * (k as f64 / n as f64)), drone_radius))
    }

    /// First colliding segment of a polyline, if any.
    pub fn first_collision(&self, points: &[Vec3], drone_radius: f64, step: f64) -> Option<usize> {
        if points.len() == 1 {
            return (!self.collision_free(&points[0], drone_radius)).then_some(0);
        }
        points
            .windows(2)
            .position(|w| !self.segment_free(&w[0], &w[1], drone_radius, step))
    }
}

/// Free function form of [`Scene3D::collision_free`].
pub fn collision_free(scene: &Scene3D, p: &Vec3, drone_radius: f64) -> bool {
    scene.collision_free(p, drone_radius)
}
