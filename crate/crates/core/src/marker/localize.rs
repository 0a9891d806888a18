use super::{Detection, MarkerError, MarkerSpec};
use crate::geometry::{CameraModel, UnitScale, Vec3, WhyConPose};

/// Position of a detected marker in the camera frame, in WhyCon units.
///
/// Depth comes from the apparent outer radius after removing the local
/// lens magnification; x and y follow the undistorted ray through the
/// center. Orientation is not estimated.
pub fn localize(
    d: &Detection,
    cam: &CameraModel,
    spec: &MarkerSpec,
    scale: &UnitScale,
) -> Result<WhyConPose, MarkerError> {
    if !(d.outer_radius > 0.0) {
        return Err(MarkerError::ZeroRadius);
    }
    let (x, y) = cam.pixel_to_normalized(d.center.0, d.center.1)?;
    let radius = d.outer_radius / cam.distortion_scale(x, y);
    let focal = (cam.fx * cam.fy).sqrt();
    let depth = focal * spec.outer_diameter / (2.0 * radius);
    let p = scale.meters_to_units(&Vec3::new(x * depth, y * depth, depth));
    Ok(WhyConPose::from_position(&p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marker::{render, Detector, MarkerPlacement};

    #[test]
    fn zero_radius() {
        let d = Detection {
            center: (320.0, 240.0),
            outer_radius: 0.0,
            inner_radius: 0.0,
            concentricity: 0.0,
        };
        let err = localize(&d, &CameraModel::default(), &MarkerSpec::default(), &UnitScale::default());
        assert!(matches!(err, Err(MarkerError::ZeroRadius)));
    }

    #[test]
    fn centered_marker_depth() {
        let cam = CameraModel::default();
        // camera at 4 m, marker at 1 m height: 3 m camera-frame depth
        let m = MarkerPlacement::level(MarkerSpec::default(), Vec3::new(0.0, 0.0, 1.0));
        let dets = Detector::default().detect(&render(&[m], &cam), 1);
        let pose = localize(&dets[0], &cam, &MarkerSpec::default(), &UnitScale::default()).unwrap();
        assert!(pose.x.abs() < 0.05 && pose.y.abs() < 0.05, "{pose:?}");
        assert!((pose.z - 30.0).abs() < 0.31, "{pose:?}");
    }

    #[test]
    fn ten_centimeter_shift_is_one_unit() {
        let cam = CameraModel::default();
        let spec = MarkerSpec::default();
        let at = |x: f64| {
            let m = MarkerPlacement::level(spec, Vec3::new(x, 0.2, 1.0));
            let d = Detector::default().detect(&render(&[m], &cam), 1)[0];
            localize(&d, &cam, &spec, &UnitScale::default()).unwrap()
        };
        let a = at(0.1);
        let b = at(0.2);
        // world +x is camera -x under the overhead mount
        let dx = (b.x - a.x).abs();
        assert!((dx - 1.0).abs() <= 0.05, "dx = {dx}");
    }
}
