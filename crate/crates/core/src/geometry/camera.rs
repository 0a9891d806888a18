use serde::{Deserialize, Serialize};

use super::{GeometryError, HomogeneousTransform, Vec3};

const UNDISTORT_TOLERANCE: f64 = 1e-9;
const UNDISTORT_MAX_ITERATIONS: usize = 50;

/// Pinhole camera with two-term radial distortion.
///
/// `extrinsics` maps world points into the camera frame (x right, y down,
/// z along the optical axis). Pixel coordinates follow
/// `u = cx + fx * x_d`, `v = cy + fy * y_d` where `(x_d, y_d)` are the
/// distorted normalized coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraModel {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub k1: f64,
    pub k2: f64,
    pub extrinsics: HomogeneousTransform,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
}

impl Default for CameraModel {
    /// 640×480 at 120 fps, mounted 4 m above the floor looking straight down.
    fn default() -> Self {
        Self::overhead(4.0)
    }
}

impl CameraModel {
    /// Downward-looking camera at `mount_height` meters above the world origin.
    pub fn overhead(mount_height: f64) -> Self {
        Self {
            fx: 900.0,
            fy: 900.0,
            cx: 320.0,
            cy: 240.0,
            k1: 0.02,
            k2: 0.0,
            extrinsics: HomogeneousTransform::half_turn_y(Vec3::new(0.0, 0.0, mount_height)),
            width: 640,
            height: 480,
            fps: 120.0,
        }
    }

    /// Same intrinsics with identity extrinsics and no distortion.
    pub fn ideal(fx: f64, fy: f64, cx: f64, cy: f64) -> Self {
        Self {
            fx,
            fy,
            cx,
            cy,
            k1: 0.0,
            k2: 0.0,
            extrinsics: HomogeneousTransform::identity(),
            width: 640,
            height: 480,
            fps: 120.0,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.fx > 0.0 && self.fy > 0.0) {
            return Err(GeometryError::InvalidCamera("focal lengths must be positive"));
        }
        if !(self.fps > 0.0) {
            return Err(GeometryError::InvalidCamera("fps must be positive"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(GeometryError::InvalidCamera("resolution must be non-zero"));
        }
        if !(self.k1.is_finite() && self.k2.is_finite()) {
            return Err(GeometryError::InvalidCamera("distortion coefficients must be finite"));
        }
        if self.extrinsics.orthonormality_error() > 1e-9 {
            return Err(GeometryError::InvalidCamera("extrinsic rotation is not orthonormal"));
        }
        Ok(())
    }

    pub fn has_distortion(&self) -> bool {
        self.k1 != 0.0 || self.k2 != 0.0
    }

    pub fn world_to_camera(&self, p: &Vec3) -> Vec3 {
        self.extrinsics.apply(p)
    }

    pub fn camera_to_world(&self, p: &Vec3) -> Vec3 {
        self.extrinsics.inverse().apply(p)
    }

    pub fn project(&self, world_point: &Vec3) -> Result<(f64, f64), GeometryError> {
        self.project_camera_point(&self.world_to_camera(world_point))
    }

    pub fn project_camera_point(&self, pc: &Vec3) -> Result<(f64, f64), GeometryError> {
        if pc.z <= 0.0 {
            return Err(GeometryError::PointBehindCamera { z: pc.z });
        }
        let (xd, yd) = self.distort(pc.x / pc.z, pc.y / pc.z);
        Ok(self.normalized_to_pixel(xd, yd))
    }

    pub fn normalized_to_pixel(&self, xd: f64, yd: f64) -> (f64, f64) {
        (self.cx + self.fx * xd, self.cy + self.fy * yd)
    }

    pub fn pixel_to_distorted(&self, u: f64, v: f64) -> (f64, f64) {
        ((u - self.cx) / self.fx, (v - self.cy) / self.fy)
    }

    fn radial_factor(&self, r2: f64) -> f64 {
        1.0 + self.k1 * r2 + self.k2 * r2 * r2
    }

    pub fn distort(&self, x: f64, y: f64) -> (f64, f64) {
        let f = self.radial_factor(x * x + y * y);
        (x * f, y * f)
    }

    /// Fixed-point inverse of [`distort`](Self::distort).
    pub fn undistort(&self, xd: f64, yd: f64) -> Result<(f64, f64), GeometryError> {
        if !self.has_distortion() {
            return Ok((xd, yd));
        }
        let (mut x, mut y) = (xd, yd);
        for _ in 0..UNDISTORT_MAX_ITERATIONS {
            let f = self.radial_factor(x * x + y * y);
            if !(f.is_finite() && f.abs() > f64::EPSILON) {
                break;
            }
            let (nx, ny) = (xd / f, yd / f);
            let step = (nx - x).hypot(ny - y);
            x = nx;
            y = ny;
            if step < UNDISTORT_TOLERANCE {
                return Ok((x, y));
            }
        }
        Err(GeometryError::UndistortDiverged { x: xd, y: yd })
    }

    /// Pixel to undistorted normalized image coordinates.
    pub fn pixel_to_normalized(&self, u: f64, v: f64) -> Result<(f64, f64), GeometryError> {
        let (xd, yd) = self.pixel_to_distorted(u, v);
        self.undistort(xd, yd)
    }

    /// Local area-equivalent magnification of the distortion at undistorted
    /// normalized point `(x, y)`: the geometric mean of the tangential and
    /// radial stretch factors.
    pub fn distortion_scale(&self, x: f64, y: f64) -> f64 {
        let r2 = x * x + y * y;
        let tangential = self.radial_factor(r2);
        let radial = tangential + 2.0 * r2 * (self.k1 + 2.0 * self.k2 * r2);
        (tangential * radial).abs().sqrt()
    }

    /// World point seen at pixel `(u, v)` with camera-frame depth `depth`.
    pub fn back_project(&self, u: f64, v: f64, depth: f64) -> Result<Vec3, GeometryError> {
        let (x, y) = self.pixel_to_normalized(u, v)?;
        Ok(self.camera_to_world(&Vec3::new(x * depth, y * depth, depth)))
    }

    pub fn in_frame(&self, u: f64, v: f64) -> bool {
        u >= 0.0 && v >= 0.0 && u < self.width as f64 && v < self.height as f64
    }

    /// Whether a world point projects inside the image, `margin` pixels in from the border.
    pub fn sees(&self, world_point: &Vec3, margin: f64) -> bool {
        match self.project(world_point) {
            Ok((u, v)) => {
                u >= margin
                    && v >= margin
                    && u < self.width as f64 - margin
                    && v < self.height as f64 - margin
            }
            Err(_) => false,
        }
    }

    pub fn frame_period(&self) -> f64 {
        1.0 / self.fps
    }
}
