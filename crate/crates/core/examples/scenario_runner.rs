//! Run every scenario preset, or a TOML config given on the command line,
//! and print its metrics summary.

use nanonav::harness::{run, ScenarioConfig, ScenarioKind};

fn main() {
    let configs: Vec<ScenarioConfig> = match std::env::args().nth(1) {
        Some(path) => vec![ScenarioConfig::load(std::path::Path::new(&path)).expect("valid config")],
        None => ScenarioKind::ALL.iter().map(|k| ScenarioConfig::preset(*k)).collect(),
    };
    for cfg in configs {
        let start = std::time::Instant::now();
        match run(&cfg) {
            Ok(out) => println!(
                "{:22} success {:5} rows {:6} control rate {:4.1} Hz  {:6.1} ms",
                cfg.scenario.name(),
                out.success,
                out.log.rows.len(),
                out.metrics.summary.as_ref().map_or(0.0, |s| s.control_rate),
                1e3 * start.elapsed().as_secs_f64()
            ),
            Err(e) => println!("{:22} error: {e}", cfg.scenario.name()),
        }
    }
}
