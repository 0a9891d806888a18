//! The pipeline latency budget and the command channel that applies it,
//! with jitter and per-drone ordering.

use nanonav::msp::{command_frame, total_latency, ChannelModel, Delivery, LatencyBudget};
use nanonav::vehicle::CommandMessage;

fn main() {
    let budget = LatencyBudget::default();
    println!("components (ms): {:?}", budget.components());
    println!(
        "perception {:.2} ms, transport {:.2} ms, total {:.2} ms",
        1e3 * budget.perception(),
        1e3 * budget.transport(),
        total_latency(&budget)
    );

    let mut channel = ChannelModel::new(20.0, 0.1, 3).expect("valid channel");
    for k in 0..8 {
        let drone = (k % 2) as u8;
        let t = k as f64 * 0.05;
        let frame = command_frame(&CommandMessage::neutral(drone)).unwrap();
        match channel.send(&budget, frame, drone, t) {
            Delivery::Delivered { t_deliver, .. } => {
                println!("drone {drone}: sent at {t:.3} s, delivered at {t_deliver:.3} s (+{:.1} ms)", 1e3 * (t_deliver - t))
            }
            Delivery::Dropped { t_send, .. } => println!("drone {drone}: sent at {t_send:.3} s, dropped"),
        }
    }
}
