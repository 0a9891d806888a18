use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Frame, MarkerSpec};
use crate::geometry::{CameraModel, Vec3};

/// A marker placed in the world: center in meters, plane normal as a unit vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarkerPlacement {
    pub spec: MarkerSpec,
    pub center: Vec3,
    pub normal: Vec3,
}

impl MarkerPlacement {
    /// Marker lying flat, facing up (+z world).
    pub fn level(spec: MarkerSpec, center: Vec3) -> Self {
        Self {
            spec,
            center,
            normal: Vec3::z(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderStyle {
    pub background: u8,
    pub ring: u8,
    pub interior: u8,
    /// Subsamples per pixel side for anti-aliasing.
    pub supersample: u32,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            background: 230,
            ring: 25,
            interior: 230,
            supersample: 4,
        }
    }
}

struct Prepared {
    center: Vec3,
    normal: Vec3,
    outer2: f64,
    inner2: f64,
    bbox: (u32, u32, u32, u32),
}

/// Rasterizes markers as seen by a [`CameraModel`].
#[derive(Debug, Clone, Default)]
pub struct Renderer {
    pub style: RenderStyle,
    /// Gaussian intensity noise (gray levels) added around rendered markers.
    pub noise_std: f64,
}

impl Renderer {
    pub fn new(style: RenderStyle, noise_std: f64) -> Self {
        Self { style, noise_std }
    }

    pub fn render(&self, markers: &[MarkerPlacement], cam: &CameraModel) -> Frame {
        let mut frame = Frame::filled(cam.width, cam.height, self.style.background);
        let prepared = self.prepare(markers, cam);
        self.rasterize(&prepared, cam, &mut frame);
        frame
    }

    pub fn render_noisy<R: Rng>(
        &self,
        markers: &[MarkerPlacement],
        cam: &CameraModel,
        rng: &mut R,
    ) -> Frame {
        let mut frame = Frame::filled(cam.width, cam.height, self.style.background);
        let prepared = self.prepare(markers, cam);
        self.rasterize(&prepared, cam, &mut frame);
        if self.noise_std > 0.0 {
            let normal = Normal::new(0.0, self.noise_std).expect("finite noise std");
            for (i, p) in prepared.iter().enumerate() {
                let (x0, y0, x1, y1) = p.bbox;
                for y in y0..=y1 {
                    for x in x0..=x1 {
                        if covered_before(&prepared[..i], x, y) {
                            continue;
                        }
                        let v = frame.get(x, y) as f64 + normal.sample(rng);
                        frame.set(x, y, v.round().clamp(0.0, 255.0) as u8);
                    }
                }
            }
        }
        frame
    }

    fn prepare(&self, markers: &[MarkerPlacement], cam: &CameraModel) -> Vec<Prepared> {
        let mut out = Vec::with_capacity(markers.len());
        for m in markers {
            let center = cam.world_to_camera(&m.center);
            let normal = cam.extrinsics.apply_vector(&m.normal).normalize();
            let outer = m.spec.outer_diameter / 2.0;
            let inner = m.spec.inner_diameter / 2.0;
            let helper = if normal.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            let e1 = normal.cross(&helper).normalize();
            let e2 = normal.cross(&e1);
            let (mut umin, mut vmin, mut umax, mut vmax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
            let mut any = false;
            for k in 0..48 {
                let a = k as f64 * std::f64::consts::TAU / 48.0;
                let rim = center + (e1 * a.cos() + e2 * a.sin()) * outer;
                if let Ok((u, v)) = cam.project_camera_point(&rim) {
                    any = true;
                    umin = umin.min(u);
                    vmin = vmin.min(v);
                    umax = umax.max(u);
                    vmax = vmax.max(v);
                }
            }
            if !any {
                continue;
            }
            let w = cam.width as f64 - 1.0;
            let h = cam.height as f64 - 1.0;
            let x0 = (umin.floor() - 2.0).max(0.0);
            let y0 = (vmin.floor() - 2.0).max(0.0);
            let x1 = (umax.ceil() + 2.0).min(w);
            let y1 = (vmax.ceil() + 2.0).min(h);
            if x0 > x1 || y0 > y1 {
                continue;
            }
            out.push(Prepared {
                center,
                normal,
                outer2: outer * outer,
                inner2: inner * inner,
                bbox: (x0 as u32, y0 as u32, x1 as u32, y1 as u32),
            });
        }
        out
    }

    fn rasterize(&self, prepared: &[Prepared], cam: &CameraModel, frame: &mut Frame) {
        let s = self.style.supersample.max(1);
        let inv = 1.0 / s as f64;
        let total = (s * s) as f64;
        for (i, p) in prepared.iter().enumerate() {
            let (x0, y0, x1, y1) = p.bbox;
            for y in y0..=y1 {
                for x in x0..=x1 {
                    if covered_before(&prepared[..i], x, y) {
                        continue;
                    }
                    let mut acc = 0.0;
                    for sy in 0..s {
                        for sx in 0..s {
                            let u = x as f64 + (sx as f64 + 0.5) * inv - 0.5;
                            let v = y as f64 + (sy as f64 + 0.5) * inv - 0.5;
                            acc += self.shade(prepared, cam, x, y, u, v) as f64;
                        }
                    }
                    frame.set(x, y, (acc / total).round() as u8);
                }
            }
        }
    }

    fn shade(&self, prepared: &[Prepared], cam: &CameraModel, px: u32, py: u32, u: f64, v: f64) -> u8 {
        let Ok((xn, yn)) = cam.pixel_to_normalized(u, v) else {
            return self.style.background;
        };
        let ray = Vec3::new(xn, yn, 1.0);
        let mut best: Option<(f64, u8)> = None;
        for p in prepared {
            let (x0, y0, x1, y1) = p.bbox;
            if px < x0 || px > x1 || py < y0 || py > y1 {
                continue;
            }
            let denom = p.normal.dot(&ray);
            if denom.abs() < 1e-12 {
                continue;
            }
            let t = p.normal.dot(&p.center) / denom;
            if t <= 0.0 {
                continue;
            }
            let rho2 = (ray * t - p.center).norm_squared();
            if rho2 > p.outer2 {
                continue;
            }
            if best.is_some_and(|(depth, _)| depth <= t) {
                continue;
            }
            let shade = if rho2 < p.inner2 {
                self.style.interior
            } else {
                self.style.ring
            };
            best = Some((t, shade));
        }
        best.map_or(self.style.background, |(_, s)| s)
    }
}

fn covered_before(prepared: &[Prepared], x: u32, y: u32) -> bool {
    prepared.iter().any(|p| {
        let (x0, y0, x1, y1) = p.bbox;
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    })
}

/// Render with the default style and no noise.
pub fn render(markers: &[MarkerPlacement], cam: &CameraModel) -> Frame {
    Renderer::default().render(markers, cam)
}
