//! Render markers into a synthetic frame, find them with the flood-fill
//! detector and recover their positions in WhyCon units.

use nanonav::geometry::{CameraModel, UnitScale, Vec3};
use nanonav::marker::{localize, render, Detector, MarkerPlacement, MarkerSpec};

fn main() {
    let cam = CameraModel::default();
    let spec = MarkerSpec::default();
    let scale = UnitScale::default();
    let truths = [Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.8, -0.5, 1.5), Vec3::new(-1.0, 0.6, 0.3)];
    let markers: Vec<MarkerPlacement> = truths.iter().map(|p| MarkerPlacement::level(spec, *p)).collect();
    let frame = render(&markers, &cam);
    let found = Detector::default().detect(&frame, truths.len());
    println!("{} markers rendered into a {}x{} frame, {} detected", truths.len(), cam.width, cam.height, found.len());
    for d in &found {
        let pose = localize(d, &cam, &spec, &scale).expect("localizes");
        let nearest = truths
            .iter()
            .map(|t| scale.meters_to_units(&cam.world_to_camera(t)))
            .min_by(|a, b| (a - pose.position()).norm().total_cmp(&(b - pose.position()).norm()))
            .unwrap();
        println!(
            "center ({:6.1}, {:6.1}) px, radius {:5.1} px -> ({:6.2}, {:6.2}, {:6.2}) units, error {:.3}",
            d.center.0,
            d.center.1,
            d.outer_radius,
            pose.x,
            pose.y,
            pose.z,
            (pose.position() - nearest).norm()
        );
    }
}
