//! Keep marker ids stable across frames, shrink the expected count when a
//! marker disappears and grow it again when the marker comes back.

use nanonav::geometry::WhyConPose;
use nanonav::marker::{disambiguate_by_z, TrackerState};

fn main() {
    let drone = WhyConPose::new(0.0, 0.0, 25.0).with_id(0);
    let platform = WhyConPose::new(5.0, 2.0, 38.0).with_id(1);
    let mut tracker = TrackerState::new(&[drone, platform]).with_miss_window(3);

    for frame in 0..14 {
        let t = frame as f64 * 0.1;
        let d = WhyConPose::new(0.3 * t, 0.0, 25.0);
        let p = WhyConPose::new(5.0 - 0.5 * t, 2.0, 38.0);
        // the platform marker is hidden for frames 4 through 8
        let seen: Vec<WhyConPose> = if (4..9).contains(&frame) { vec![d] } else { vec![p, d] };
        let outcome = tracker.track(&seen);
        let change = tracker.adapt_count();
        let ids: Vec<String> = outcome.assignments.iter().map(|(id, det)| format!("{id}<-{det}")).collect();
        print!("frame {frame:2}: {} detections, assignments [{}], expecting {}", seen.len(), ids.join(" "), tracker.expected_count);
        if let Some(c) = change {
            print!("  {c:?}");
        }
        println!();
    }

    let (d, p) = disambiguate_by_z(&[platform, drone]).unwrap();
    println!("by depth: drone at z {:.0}, platform at z {:.0}", d.z, p.z);
}
