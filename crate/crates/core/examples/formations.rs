//! Formation setpoints: one circular lap, three drones 120 degrees apart,
//! and a square walked around a fixed center.

use nanonav::control::Setpoint;
use nanonav::planning::{formation_lap, formation_waypoint, square_formation, FormationParams};

fn main() {
    let base = FormationParams::new(8.0, 0.0, 0, 0);
    let lap = formation_lap(&base, 0);
    println!("circle: {} setpoints, first {:?}, tenth {:?}", lap.len(), lap[0], lap[9]);

    for a in [0, 9, 18] {
        let angles: Vec<String> = (0..3)
            .map(|id| {
                let p = formation_waypoint(&FormationParams::new(8.0, 120.0, id, a));
                format!("({:6.2}, {:6.2})", p.x, p.y)
            })
            .collect();
        println!("rotation step {a:2}: {}", angles.join(" "));
    }

    let square = square_formation(10.0, Setpoint::new(0.0, 0.0, 20.0), 3).expect("three drones");
    for (i, seq) in square.iter().enumerate() {
        let pts: Vec<String> = seq.iter().map(|s| format!("({:.0}, {:.0})", s.x, s.y)).collect();
        println!("square drone {i}: {}", pts.join(" "));
    }
}
