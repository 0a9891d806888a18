//! Search gains axis by axis over repeated closed-loop trials until the
//! steady-state error drops below the threshold.

use nanonav::control::{iterative_autotune, AutotuneConfig, AxisRanges, FirstOrderSurrogate};

fn main() {
    let cfg = AutotuneConfig::new([AxisRanges::new((0.0, 30.0), (0.0, 50.0), (0.0, 2.0)); 3]);
    let report = iterative_autotune(&mut FirstOrderSurrogate::new(1.0, 0.5), &cfg).expect("converges");
    let g = report.gains.as_array();
    let e = report.final_errors();
    println!("{} trials", report.history.len());
    for (k, name) in ["pitch", "roll", "throttle"].iter().enumerate() {
        println!("{name:9} Kp {:6.2} Ki {:6.2} Kd {:5.2}  steady error {:.3}", g[k].kp, g[k].ki, g[k].kd, e[k]);
    }

    let empty = AutotuneConfig::new([AxisRanges::new((0.0, 0.0), (0.0, 0.0), (0.0, 0.0)); 3]);
    match iterative_autotune(&mut FirstOrderSurrogate::new(1.0, 0.5), &empty) {
        Ok(_) => println!("empty ranges converged"),
        Err(e) => println!("empty ranges: {e}"),
    }
}
