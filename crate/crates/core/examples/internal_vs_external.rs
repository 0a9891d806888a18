//! The same hold task flown twice: once on the drone's own drifting
//! estimate and once on camera feedback.

use nanonav::harness::{run, summarize, ScenarioConfig, ScenarioKind};

fn main() {
    for kind in [ScenarioKind::InternalOnlyDrift, ScenarioKind::PositionHold] {
        let cfg = ScenarioConfig::preset(kind);
        let out = run(&cfg).expect("runs");
        let s = summarize(&out.log).expect("log has rows");
        let left = out.log.drone(0).find(|r| !r.in_fov).map(|r| r.t);
        println!(
            "{:20} {:5.1} s, worst truth error x {:5.2} y {:5.2} z {:5.2} units, left the frame: {}",
            kind.name(),
            out.log.drone(0).last().map_or(0.0, |r| r.t),
            s.truth_error[0].max_abs,
            s.truth_error[1].max_abs,
            s.truth_error[2].max_abs,
            left.map_or("no".to_string(), |t| format!("at {t:.1} s"))
        );
    }
}
