//! Plan through a row of hoops with RRT* and check every plan against the
//! scene at a fine sampling step.

use nanonav::geometry::Vec3;
use nanonav::planning::{hoop_traversal_plan, Aabb, Hoop, HoopTraversalConfig, Scene3D, VALIDATION_STEP};

fn main() {
    let scene = Scene3D {
        bounds: Aabb::new(Vec3::new(-12.0, -6.0, -4.0), Vec3::new(12.0, 6.0, 4.0)),
        hoops: vec![
            Hoop::new(Vec3::new(-5.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), 1.5, 0.2),
            Hoop::new(Vec3::new(0.0, 1.5, 0.5), Vec3::new(1.0, 0.0, 0.0), 1.5, 0.2),
            Hoop::new(Vec3::new(5.0, -1.0, -0.5), Vec3::new(1.0, 0.0, 0.0), 1.5, 0.2),
        ],
        boxes: Vec::new(),
    };
    let cfg = HoopTraversalConfig::default();
    let legs = hoop_traversal_plan(&scene, &[0, 1, 2], Vec3::new(-10.0, 0.0, 0.0), Some(Vec3::new(10.0, 0.0, 0.0)), &cfg)
        .expect("plans");
    for leg in &legs {
        let pts = leg.plan.points();
        let collision = scene.first_collision(&pts, cfg.rrt.drone_radius, VALIDATION_STEP);
        println!(
            "hoop {} {:8}: {:3} waypoints, length {:5.2}, {:4} iterations, {:6.1} ms, collision {:?}",
            leg.hoop,
            format!("{:?}", leg.leg),
            leg.plan.waypoints.len(),
            leg.plan.cost,
            leg.plan.iterations,
            1e3 * leg.plan.planning_time,
            collision
        );
    }
    let path: Vec<Vec3> = legs.iter().flat_map(|l| l.plan.points()).collect();
    for (i, h) in scene.hoops.iter().enumerate() {
        let through = path.windows(2).any(|w| h.passes_through(&w[0], &w[1]));
        println!("hoop {i} passed: {through}");
    }
}
