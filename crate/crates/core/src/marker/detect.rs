use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::{Frame, MarkerSpec};

/// A concentric ring candidate that passed the acceptance tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    /// Subpixel center in (distorted) image coordinates.
    pub center: (f64, f64),
    pub outer_radius: f64,
    pub inner_radius: f64,
    /// Distance between the ring centroid and the interior centroid, pixels.
    pub concentricity: f64,
}

impl Detection {
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.outer_radius * self.outer_radius
    }
}

/// Flood-fill detector for dark rings around a bright disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Detector {
    pub spec: MarkerSpec,
    /// Allowed relative deviation of the inner/outer radius ratio.
    pub ratio_tolerance: f64,
    pub max_concentricity: f64,
    pub min_ring_pixels: usize,
    /// Minimum separation of the two intensity classes, gray levels.
    pub min_contrast: f64,
}

impl Default for Detector {
    fn default() -> Self {
        Self {
            spec: MarkerSpec::default(),
            ratio_tolerance: 0.25,
            max_concentricity: 2.0,
            min_ring_pixels: 6,
            min_contrast: 40.0,
        }
    }
}

struct Levels {
    threshold: u8,
    dark: f64,
    bright: f64,
}

/// Otsu threshold, then moved to the midpoint of the two class means.
fn classify(frame: &Frame) -> Option<Levels> {
    let mut hist = [0u64; 256];
    for &p in &frame.pixels {
        hist[p as usize] += 1;
    }
    let total: u64 = hist.iter().sum();
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &h)| i as f64 * h as f64).sum();
    let mut w0 = 0u64;
    let mut sum0 = 0.0;
    let mut best = (0.0, None);
    for t in 0..255usize {
        w0 += hist[t];
        sum0 += t as f64 * hist[t] as f64;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let m0 = sum0 / w0 as f64;
        let m1 = (sum_all - sum0) / w1 as f64;
        let var = w0 as f64 * w1 as f64 * (m0 - m1) * (m0 - m1);
        if var > best.0 {
            best = (var, Some((t, m0, m1)));
        }
    }
    let (_, m0, m1) = best.1?;
    // refine: split at the midpoint of the class means
    let mid = ((m0 + m1) / 2.0).round().clamp(1.0, 255.0) as usize;
    let c0: u64 = hist[..mid].iter().sum();
    let c1: u64 = hist[mid..].iter().sum();
    if c0 == 0 || c1 == 0 {
        return None;
    }
    Some(Levels {
        threshold: mid as u8,
        dark: peak_level(&hist[..mid], 0),
        bright: peak_level(&hist[mid..], mid),
    })
}

/// Level of the dominant mode in a histogram slice: the mean over bins
/// within ±8 of the peak, so edge pixels of the minority class do not pull
/// the estimate.
fn peak_level(hist: &[u64], offset: usize) -> f64 {
    let peak = hist
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map_or(0, |(i, _)| i);
    let lo = peak.saturating_sub(8);
    let hi = (peak + 8).min(hist.len() - 1);
    let (mut n, mut s) = (0u64, 0.0);
    for (i, &h) in hist.iter().enumerate().take(hi + 1).skip(lo) {
        n += h;
        s += i as f64 * h as f64;
    }
    offset as f64 + s / n.max(1) as f64
}

impl Detector {
    pub fn new(spec: MarkerSpec) -> Self {
        Self {
            spec,
            ..Self::default()
        }
    }

    /// Accepted detections, largest first, at most `limit` of them.
    pub fn detect(&self, frame: &Frame, limit: usize) -> Vec<Detection> {
        if limit == 0 || !frame.is_valid() || frame.pixels.is_empty() {
            return Vec::new();
        }
        let Some(levels) = classify(frame) else {
            return Vec::new();
        };
        if levels.bright - levels.dark < self.min_contrast {
            return Vec::new();
        }
        let w = frame.width as usize;
        let h = frame.height as usize;
        let span = levels.bright - levels.dark;
        let darkness = |v: u8| (levels.bright - v as f64) / span;
        let is_dark = |v: u8| v < levels.threshold;

        // 0 = unvisited; ring components get their own label, interiors are stamped too
        let mut label = vec![0u32; w * h];
        let mut stamp = vec![0u32; w * h];
        let mut next_label = 1u32;
        let mut queue = VecDeque::new();
        let mut ring = Vec::new();
        let mut interior = Vec::new();
        let mut found = Vec::new();

        for start in 0..w * h {
            if label[start] != 0 || !is_dark(frame.pixels[start]) {
                continue;
            }
            let id = next_label;
            next_label += 1;

            ring.clear();
            label[start] = id;
            queue.push_back(start);
            let (mut bx0, mut by0, mut bx1, mut by1) = (usize::MAX, usize::MAX, 0, 0);
            while let Some(i) = queue.pop_front() {
                ring.push(i);
                let (x, y) = (i % w, i / w);
                bx0 = bx0.min(x);
                by0 = by0.min(y);
                bx1 = bx1.max(x);
                by1 = by1.max(y);
                for n in neighbors4(x, y, w, h) {
                    if label[n] == 0 && is_dark(frame.pixels[n]) {
                        label[n] = id;
                        queue.push_back(n);
                    }
                }
            }
            if ring.len() < self.min_ring_pixels || bx1 - bx0 < 2 || by1 - by0 < 2 {
                continue;
            }

            // darkness mass over the ring and its 8-neighborhood
            let stamp_ring = id * 2;
            let mut mass = 0.0;
            let (mut mx, mut my) = (0.0, 0.0);
            for &i in &ring {
                let (x, y) = (i % w, i / w);
                for n in neighbors8_and_self(x, y, w, h) {
                    if stamp[n] == stamp_ring {
                        continue;
                    }
                    stamp[n] = stamp_ring;
                    let d = darkness(frame.pixels[n]);
                    mass += d;
                    mx += d * (n % w) as f64;
                    my += d * (n / w) as f64;
                }
            }
            if mass <= 0.0 {
                continue;
            }
            let ring_center = (mx / mass, my / mass);

            // the interior must be a bright region enclosed by the ring
            let sx = ring_center.0.round() as usize;
            let sy = ring_center.1.round() as usize;
            let Some(seed) = seed_near(frame, sx, sy, w, h, |v| !is_dark(v)) else {
                continue;
            };
            interior.clear();
            let stamp_in = id * 2 + 1;
            let mut enclosed = true;
            stamp[seed] = stamp_in;
            queue.push_back(seed);
            while let Some(i) = queue.pop_front() {
                let (x, y) = (i % w, i / w);
                if x <= bx0 || x >= bx1 || y <= by0 || y >= by1 {
                    enclosed = false;
                    queue.clear();
                    break;
                }
                interior.push(i);
                for n in neighbors4(x, y, w, h) {
                    if stamp[n] != stamp_in && label[n] != id && !is_dark(frame.pixels[n]) {
                        stamp[n] = stamp_in;
                        queue.push_back(n);
                    }
                }
            }
            if !enclosed || interior.is_empty() {
                continue;
            }

            // brightness mass of the interior plus the ring pixels bordering it
            let mut inner_mass = 0.0;
            let (mut ix, mut iy) = (0.0, 0.0);
            for k in 0..interior.len() {
                let i = interior[k];
                let (x, y) = (i % w, i / w);
                let b = 1.0 - darkness(frame.pixels[i]);
                inner_mass += b;
                ix += b * x as f64;
                iy += b * y as f64;
                for n in neighbors4(x, y, w, h) {
                    if label[n] == id && stamp[n] != stamp_in {
                        stamp[n] = stamp_in;
                        let b = (1.0 - darkness(frame.pixels[n])).max(0.0);
                        inner_mass += b;
                        ix += b * (n % w) as f64;
                        iy += b * (n / w) as f64;
                    }
                }
            }
            if inner_mass <= 0.0 {
                continue;
            }
            let inner_center = (ix / inner_mass, iy / inner_mass);
            let disc = mass + inner_mass;
            let outer_radius = (disc / std::f64::consts::PI).sqrt();
            let inner_radius = (inner_mass / std::f64::consts::PI).sqrt();
            let center = (
                (mx + ix) / disc,
                (my + iy) / disc,
            );
            let concentricity =
                (ring_center.0 - inner_center.0).hypot(ring_center.1 - inner_center.1);

            let expected = self.spec.ratio();
            let ratio = inner_radius / outer_radius;
            if (ratio - expected).abs() > self.ratio_tolerance * expected {
                continue;
            }
            if concentricity > self.max_concentricity {
                continue;
            }
            found.push(Detection {
                center,
                outer_radius,
                inner_radius,
                concentricity,
            });
        }

        found.sort_by(|a, b| b.outer_radius.total_cmp(&a.outer_radius));
        found.truncate(limit);
        found
    }
}

fn neighbors4(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let mut out = [usize::MAX; 4];
    if x > 0 {
        out[0] = y * w + x - 1;
    }
    if x + 1 < w {
        out[1] = y * w + x + 1;
    }
    if y > 0 {
        out[2] = (y - 1) * w + x;
    }
    if y + 1 < h {
        out[3] = (y + 1) * w + x;
    }
    out.into_iter().filter(|&i| i != usize::MAX)
}

fn neighbors8_and_self(x: usize, y: usize, w: usize, h: usize) -> impl Iterator<Item = usize> {
    let xs = x.saturating_sub(1)..=(x + 1).min(w - 1);
    let ys = y.saturating_sub(1)..=(y + 1).min(h - 1);
    ys.flat_map(move |yy| xs.clone().map(move |xx| yy * w + xx))
}

fn seed_near(
    frame: &Frame,
    x: usize,
    y: usize,
    w: usize,
    h: usize,
    accept: impl Fn(u8) -> bool,
) -> Option<usize> {
    if x >= w || y >= h {
        return None;
    }
    neighbors8_and_self(x, y, w, h)
        .filter(|&i| accept(frame.pixels[i]))
        .min_by_key(|&i| {
            let dx = (i % w) as i64 - x as i64;
            let dy = (i / w) as i64 - y as i64;
            (dx * dx + dy * dy, i)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{CameraModel, HomogeneousTransform, Vec3};
    use crate::marker::{render, MarkerPlacement};

    fn cam() -> CameraModel {
        let mut c = CameraModel::ideal(900.0, 900.0, 320.0, 240.0);
        c.extrinsics = HomogeneousTransform::identity();
        c
    }

    fn facing(center: Vec3) -> MarkerPlacement {
        MarkerPlacement {
            spec: MarkerSpec::default(),
            center,
            normal: -Vec3::z(),
        }
    }

    #[test]
    fn finds_centered_marker() {
        let c = cam();
        let m = facing(Vec3::new(0.0, 0.0, 3.0));
        let dets = Detector::default().detect(&render(&[m], &c), 4);
        assert_eq!(dets.len(), 1);
        let (u, v) = c.project(&m.center).unwrap();
        let d = dets[0];
        assert!((d.center.0 - u).abs() < 0.5 && (d.center.1 - v).abs() < 0.5, "{d:?}");
        let expected = 900.0 * 0.0275 / 3.0;
        assert!((d.outer_radius - expected).abs() < 0.1, "{} vs {expected}", d.outer_radius);
    }

    #[test]
    fn blank_frame_has_nothing() {
        assert!(Detector::default().detect(&Frame::filled(640, 480, 230), 4).is_empty());
    }

    #[test]
    fn filled_disc_is_rejected() {
        let mut f = Frame::filled(640, 480, 230);
        for y in 0..480u32 {
            for x in 0..640u32 {
                if (x as f64 - 300.0).hypot(y as f64 - 200.0) < 12.0 {
                    f.set(x, y, 25);
                }
            }
        }
        assert!(Detector::default().detect(&f, 4).is_empty());
    }

    #[test]
    fn wrong_ratio_is_rejected() {
        let m = MarkerPlacement {
            spec: MarkerSpec { outer_diameter: 0.055, inner_diameter: 0.045 },
            center: Vec3::new(0.0, 0.0, 2.5),
            normal: -Vec3::z(),
        };
        assert!(Detector::default().detect(&render(&[m], &cam()), 4).is_empty());
    }

    #[test]
    fn limit_keeps_largest() {
        let c = cam();
        let near = facing(Vec3::new(-0.3, 0.0, 2.0));
        let far = facing(Vec3::new(0.3, 0.0, 4.0));
        let frame = render(&[near, far], &c);
        let all = Detector::default().detect(&frame, 5);
        assert_eq!(all.len(), 2);
        let one = Detector::default().detect(&frame, 1);
        assert_eq!(one.len(), 1);
        assert!(one[0].center.0 < 320.0);
    }
}
