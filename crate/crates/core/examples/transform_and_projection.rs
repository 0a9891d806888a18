//! Carry a point through the overhead camera: world to camera frame,
//! through the lens to a pixel, and back along the known depth.

use std::f64::consts::PI;

use nanonav::geometry::{CameraModel, HomogeneousTransform, UnitScale, Vec3};

fn main() {
    let flip = HomogeneousTransform::half_turn_y(Vec3::zeros());
    println!("half turn about y maps (1, 2, 3) to {:?}", flip.apply(&Vec3::new(1.0, 2.0, 3.0)).as_slice());

    let tilt = HomogeneousTransform::about_y(PI / 6.0, Vec3::new(0.5, 0.0, 2.0));
    let p = Vec3::new(0.3, -0.4, 1.1);
    let there_and_back = tilt.compose(&tilt.inverse()).apply(&p);
    println!("compose with inverse moves the point by {:.2e} m", (there_and_back - p).norm());

    let cam = CameraModel::default();
    let scale = UnitScale::default();
    println!("{:>22} {:>18} {:>22} {:>12}", "world (m)", "pixel", "whycon (units)", "error (m)");
    for world in [
        Vec3::new(0.0, 0.0, 1.0),
        Vec3::new(0.6, -0.3, 1.5),
        Vec3::new(-0.9, 0.5, 0.5),
        Vec3::new(0.4, 0.3, 2.0),
    ] {
        let (u, v) = cam.project(&world).expect("in front of the camera");
        let depth = cam.world_to_camera(&world).z;
        let back = cam.back_project(u, v, depth).expect("undistorts");
        let units = scale.meters_to_units(&cam.world_to_camera(&world));
        println!(
            "{:>22} {:>18} {:>22} {:>12.2e}",
            format!("({:.2}, {:.2}, {:.2})", world.x, world.y, world.z),
            format!("({u:.1}, {v:.1})"),
            format!("({:.2}, {:.2}, {:.2})", units.x, units.y, units.z),
            (back - world).norm()
        );
    }
}
