use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{GeometryError, WhyConPose};

const MIN_SAMPLES: usize = 6;
const MAX_ITERATIONS: usize = 100;

/// Semi-ellipsoid model of raw marker depth over the image plane:
/// `z(x, y) = apex_z * sqrt(1 - x²/A² - y²/B²)`.
///
/// Infinite semi-axes describe a flat reading along that axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipsoidZCorrection {
    pub semi_axis_x: f64,
    pub semi_axis_y: f64,
    pub apex_z: f64,
    #[serde(default)]
    pub rms_residual: f64,
}

impl EllipsoidZCorrection {
    pub fn new(semi_axis_x: f64, semi_axis_y: f64, apex_z: f64) -> Self {
        Self {
            semi_axis_x,
            semi_axis_y,
            apex_z,
            rms_residual: 0.0,
        }
    }

    /// Normalized footprint radius squared; the model is defined for `< 1`.
    pub fn footprint(&self, x: f64, y: f64) -> f64 {
        x * x * inv_sq(self.semi_axis_x) + y * y * inv_sq(self.semi_axis_y)
    }

    pub fn model_z(&self, x: f64, y: f64) -> Result<f64, GeometryError> {
        let q = self.footprint(x, y);
        if q >= 1.0 {
            return Err(GeometryError::FitOutOfDomain { x, y });
        }
        Ok(self.apex_z * (1.0 - q).sqrt())
    }

    /// Forward model: the raw reading produced for true depth `z` at `(x, y)`.
    pub fn raw_reading(&self, pose: &WhyConPose) -> Result<WhyConPose, GeometryError> {
        let q = self.footprint(pose.x, pose.y);
        if q >= 1.0 {
            return Err(GeometryError::FitOutOfDomain { x: pose.x, y: pose.y });
        }
        Ok(WhyConPose {
            z: pose.z * (1.0 - q).sqrt(),
            ..*pose
        })
    }
}

fn inv_sq(axis: f64) -> f64 {
    if axis.is_infinite() {
        0.0
    } else {
        1.0 / (axis * axis)
    }
}

fn axis_from_inv_sq(u: f64) -> f64 {
    if u <= 0.0 {
        f64::INFINITY
    } else {
        1.0 / u.sqrt()
    }
}

/// Least-squares fit of the semi-ellipsoid to `(x, y, z_raw)` samples.
///
/// Seeds from the linear fit of `z²` on `(1, x², y²)`, then refines the
/// depth residuals with Gauss–Newton.
pub fn fit_ellipsoid_z(samples: &[(f64, f64, f64)]) -> Result<EllipsoidZCorrection, GeometryError> {
    if samples.len() < MIN_SAMPLES {
        return Err(GeometryError::DegenerateSamples(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let (x0, y0, _) = samples[0];
    if samples.iter().all(|&(x, y, _)| x == x0 && y == y0) {
        return Err(GeometryError::DegenerateSamples(
            "all samples share one (x, y)".into(),
        ));
    }

    let n = samples.len();
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let (x, y, _) = samples[i];
        match j {
            0 => 1.0,
            1 => x * x,
            _ => y * y,
        }
    });
    let rhs = DVector::from_iterator(n, samples.iter().map(|&(_, _, z)| z * z));
    let coeffs = design
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| GeometryError::DegenerateSamples(e.to_string()))?;
    if !(coeffs[0] > 0.0) {
        return Err(GeometryError::DegenerateSamples(
            "non-positive apex estimate".into(),
        ));
    }
    let mut params = Vector3::new(
        coeffs[0].sqrt(),
        (-coeffs[1] / coeffs[0]).max(0.0),
        (-coeffs[2] / coeffs[0]).max(0.0),
    );
    params = shrink_into_domain(samples, params);

    let mut cost = sum_sq(samples, &params);
    for _ in 0..MAX_ITERATIONS {
        let mut jtj = Matrix3::zeros();
        let mut jtr = Vector3::zeros();
        for &(x, y, z) in samples {
            let s = (1.0 - params[1] * x * x - params[2] * y * y).sqrt();
            let r = params[0] * s - z;
            let j = Vector3::new(s, -params[0] * x * x / (2.0 * s), -params[0] * y * y / (2.0 * s));
            jtj += j * j.transpose();
            jtr += j * r;
        }
        let Ok(step) = jtj.svd(true, true).solve(&(-jtr), 1e-14) else {
            break;
        };
        let mut scale = 1.0;
        let mut improved = false;
        while scale > 1e-6 {
            let mut candidate = params + step * scale;
            candidate[1] = candidate[1].max(0.0);
            candidate[2] = candidate[2].max(0.0);
            if candidate[0] > 0.0 && in_domain(samples, &candidate) {
                let c = sum_sq(samples, &candidate);
                if c <= cost {
                    params = candidate;
                    improved = c < cost;
                    cost = c;
                    break;
                }
            }
            scale *= 0.5;
        }
        if !improved || (step * scale).norm() < 1e-14 * (1.0 + params.norm()) {
            break;
        }
    }

    if !in_domain(samples, &params) {
        let &(x, y, _) = samples
            .iter()
            .find(|&&(x, y, _)| params[1] * x * x + params[2] * y * y >= 1.0)
            .unwrap_or(&samples[0]);
        return Err(GeometryError::FitOutOfDomain { x, y });
    }

    Ok(EllipsoidZCorrection {
        semi_axis_x: axis_from_inv_sq(params[1]),
        semi_axis_y: axis_from_inv_sq(params[2]),
        apex_z: params[0],
        rms_residual: (cost / n as f64).sqrt(),
    })
}

fn in_domain(samples: &[(f64, f64, f64)], p: &Vector3<f64>) -> bool {
    samples
        .iter()
        .all(|&(x, y, _)| p[1] * x * x + p[2] * y * y < 1.0)
}

fn shrink_into_domain(samples: &[(f64, f64, f64)], mut p: Vector3<f64>) -> Vector3<f64> {
    let worst = samples
        .iter()
        .map(|&(x, y, _)| p[1] * x * x + p[2] * y * y)
        .fold(0.0, f64::max);
    if worst >= 1.0 {
        let k = 0.99 / worst;
        p[1] *= k;
        p[2] *= k;
    }
    p
}

fn sum_sq(samples: &[(f64, f64, f64)], p: &Vector3<f64>) -> f64 {
    samples
        .iter()
        .map(|&(x, y, z)| {
            let r = p[0] * (1.0 - p[1] * x * x - p[2] * y * y).sqrt() - z;
            r * r
        })
        .sum()
}

/// Replace a raw depth reading with its apex-equivalent value.
pub fn correct_z(c: &EllipsoidZCorrection, pose: &WhyConPose) -> Result<WhyConPose, GeometryError> {
    let model = c.model_z(pose.x, pose.y)?;
    Ok(WhyConPose {
        z: pose.z * c.apex_z / model,
        ..*pose
    })
}
