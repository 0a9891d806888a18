//! Relay feedback on a dead-time plant gives the ultimate gain and period;
//! the Ziegler-Nichols rows turn them into PID gains.

use nanonav::control::{overshoot, relay_tune, step_response, zn_gains, ControllerType, RelayConfig, SecondOrderPlant};

fn main() {
    let dt = 0.001;
    let mut plant = SecondOrderPlant::surrogate(dt);
    let (crossover, ku_true) = plant.ultimate();
    let tu_true = 2.0 * std::f64::consts::PI / crossover;
    let cfg = RelayConfig {
        setpoint: 0.5,
        amplitude: 1.0,
        dt,
        ..RelayConfig::default()
    };
    let r = relay_tune(&mut plant, cfg).expect("oscillates");
    println!("relay: Ku {:.3}, Tu {:.3} s (frequency response gives {ku_true:.3}, {tu_true:.3} s)", r.ku, r.tu);
    println!("{:22} {:>8} {:>8} {:>8} {:>10}", "controller", "Kp", "Ki", "Kd", "overshoot");
    for c in ControllerType::ALL {
        let g = zn_gains(&r, c);
        let mut p = SecondOrderPlant::surrogate(dt);
        let os = overshoot(&step_response(&mut p, &g, 1.0, 60.0, dt), 1.0);
        println!("{:22} {:8.3} {:8.3} {:8.3} {:9.1}%", c.name(), g.kp, g.ki, g.kd, 100.0 * os);
    }
}
