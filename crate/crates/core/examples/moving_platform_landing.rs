//! Follow a platform driving a circle, hover over it through a marker
//! occlusion and land on it.

use nanonav::harness::{landing_scenario, ScenarioConfig, ScenarioKind};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let mut cfg = ScenarioConfig::preset(ScenarioKind::MovingPlatformLanding);
    cfg.seed = seed;
    match landing_scenario(&cfg) {
        Ok(l) => {
            for (t, from, to) in &l.count_changes {
                println!("{t:6.2} s  marker count {from} -> {to}");
            }
            if let Some(t) = l.descent_start {
                println!("{t:6.2} s  descent started");
            }
            println!("{:6.2} s  touchdown {:.3} units from the pad center", l.touchdown_time, l.touchdown_offset);
            println!(
                "hover error x {:.2} y {:.2} z {:.2}, worst platform tracking error {:.2}, success {}",
                l.hover_errors[0], l.hover_errors[1], l.hover_errors[2], l.track_error_max, l.success
            );
        }
        Err(e) => println!("seed {seed}: {e}"),
    }
}
