//! A position-hold run with camera feedback, reported as the share of
//! samples inside the allowed error band on each axis.

use nanonav::harness::{run, ScenarioConfig, ScenarioKind};

fn main() {
    let cfg = ScenarioConfig::preset(ScenarioKind::PositionHold);
    let out = run(&cfg).expect("runs");
    let env = &cfg.hold.envelope;
    let errors: Vec<[f64; 3]> = out.log.drone(0).filter(|r| r.t >= cfg.hold.settle).filter_map(|r| r.error).collect();
    println!("held for {:.1} s after a {:.0} s settle, {} control ticks", cfg.duration - cfg.hold.settle, cfg.hold.settle, errors.len());
    for (k, (name, band)) in [("x", env.x), ("y", env.y), ("z", env.z)].into_iter().enumerate() {
        let inside = errors.iter().filter(|e| e[k] >= band[0] && e[k] <= band[1]).count();
        let mean = errors.iter().map(|e| e[k]).sum::<f64>() / errors.len() as f64;
        println!(
            "{name}: band [{:5.2}, {:5.2}], {:5.1}% inside, mean error {mean:6.3}",
            band[0],
            band[1],
            100.0 * inside as f64 / errors.len() as f64
        );
    }
    println!("scenario success: {}", out.success);
}
