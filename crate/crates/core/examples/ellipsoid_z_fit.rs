//! Raw marker depth bends down toward the frame edges. Fit the bend from a
//! grid of readings taken at one true height and flatten it back out.

use nanonav::geometry::{correct_z, fit_ellipsoid_z, EllipsoidZCorrection, WhyConPose};

fn main() {
    let truth = EllipsoidZCorrection::new(20.0, 15.0, 30.0);
    let mut samples = Vec::new();
    for i in -4..=4 {
        for j in -3..=3 {
            let (x, y) = (2.0 * i as f64, 2.0 * j as f64);
            samples.push((x, y, truth.model_z(x, y).unwrap()));
        }
    }
    let fit = fit_ellipsoid_z(&samples).expect("fits");
    println!(
        "fitted A {:.4}, B {:.4}, apex {:.4} (rms residual {:.2e}) from {} readings",
        fit.semi_axis_x,
        fit.semi_axis_y,
        fit.apex_z,
        fit.rms_residual,
        samples.len()
    );
    println!("{:>8} {:>8} {:>10} {:>10}", "x", "y", "raw z", "corrected");
    for (x, y) in [(0.0, 0.0), (4.0, 2.0), (8.0, -6.0), (-8.0, 6.0)] {
        let raw = WhyConPose::new(x, y, truth.model_z(x, y).unwrap());
        let fixed = correct_z(&fit, &raw).unwrap();
        println!("{x:>8.1} {y:>8.1} {:>10.3} {:>10.3}", raw.z, fixed.z);
    }
    match correct_z(&fit, &WhyConPose::new(25.0, 0.0, 30.0)) {
        Ok(_) => println!("outside the footprint was accepted"),
        Err(e) => println!("outside the footprint: {e}"),
    }
}
