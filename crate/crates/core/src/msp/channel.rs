use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{MspError, MspFrame};

/// Per-stage delays of the multi-drone pipeline, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyBudget {
    pub frame_capture: f64,
    pub marker_detection: f64,
    pub drone_identification: f64,
    pub pid_loop: f64,
    pub msp_packet: f64,
    pub communication: f64,
}

impl Default for LatencyBudget {
    fn default() -> Self {
        Self {
            frame_capture: 8.33,
            marker_detection: 12.0,
            drone_identification: 27.0,
            pid_loop: 100.0,
            msp_packet: 190.0,
            communication: 4.0,
        }
    }
}

fn micros(ms: f64) -> i64 {
    (ms * 1000.0).round() as i64
}

impl LatencyBudget {
    pub fn zero() -> Self {
        Self {
            frame_capture: 0.0,
            marker_detection: 0.0,
            drone_identification: 0.0,
            pid_loop: 0.0,
            msp_packet: 0.0,
            communication: 0.0,
        }
    }

    pub fn components(&self) -> [f64; 6] {
        [
            self.frame_capture,
            self.marker_detection,
            self.drone_identification,
            self.pid_loop,
            self.msp_packet,
            self.communication,
        ]
    }

    pub fn validate(&self) -> Result<(), MspError> {
        if self.components().iter().all(|c| c.is_finite() && *c >= 0.0) {
            Ok(())
        } else {
            Err(MspError::NegativeLatency)
        }
    }

    /// Capture to pose available, in seconds.
    pub fn perception(&self) -> f64 {
        (micros(self.frame_capture) + micros(self.marker_detection) + micros(self.drone_identification)) as f64 / 1e6
    }

    /// Packet build plus radio delivery, in seconds.
    pub fn transport(&self) -> f64 {
        (micros(self.msp_packet) + micros(self.communication)) as f64 / 1e6
    }

    pub fn scaled(&self, k: f64) -> Self {
        let c = self.components().map(|v| v * k);
        Self {
            frame_capture: c[0],
            marker_detection: c[1],
            drone_identification: c[2],
            pid_loop: c[3],
            msp_packet: c[4],
            communication: c[5],
        }
    }
}

/// Sum of all stages in milliseconds, accumulated in whole microseconds.
pub fn total_latency(budget: &LatencyBudget) -> f64 {
    budget.components().iter().map(|&c| micros(c)).sum::<i64>() as f64 / 1000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Delivery {
    Delivered { t_deliver: f64, drone_index: u8, frame: MspFrame },
    Dropped { t_send: f64, drone_index: u8 },
}

/// Star topology: sender to router to drone.
#[derive(Debug, Clone)]
pub struct ChannelModel {
    /// Added per hop on top of the budget's communication delay, ms.
    pub per_hop_delay: f64,
    pub hops: u32,
    pub jitter_std: f64,
    pub drop_probability: f64,
    pub seed: u64,
    rng: ChaCha8Rng,
    last_delivery: BTreeMap<u8, f64>,
}

impl ChannelModel {
    pub fn new(jitter_std: f64, drop_probability: f64, seed: u64) -> Result<Self, MspError> {
        if !(0.0..=1.0).contains(&drop_probability) {
            return Err(MspError::InvalidDropProbability(drop_probability));
        }
        Ok(Self {
            per_hop_delay: 0.0,
            hops: 2,
            jitter_std: jitter_std.max(0.0),
            drop_probability,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            last_delivery: BTreeMap::new(),
        })
    }

    pub fn ideal() -> Self {
        Self::new(0.0, 0.0, 0).unwrap()
    }

    /// Hand a frame to the channel at `t_now` seconds.
    pub fn send(&mut self, budget: &LatencyBudget, frame: MspFrame, drone_index: u8, t_now: f64) -> Delivery {
        let draw: f64 = self.rng.random();
        let noise = if self.jitter_std > 0.0 {
            Normal::new(0.0, self.jitter_std).unwrap().sample(&mut self.rng)
        } else {
            0.0
        };
        if draw < self.drop_probability {
            return Delivery::Dropped {
                t_send: t_now,
                drone_index,
            };
        }
        let delay_ms = (budget.transport() * 1000.0 + self.hops as f64 * self.per_hop_delay + noise).max(0.0);
        let mut t_deliver = t_now + delay_ms / 1000.0;
        if let Some(&last) = self.last_delivery.get(&drone_index) {
            t_deliver = t_deliver.max(last);
        }
        self.last_delivery.insert(drone_index, t_deliver);
        Delivery::Delivered {
            t_deliver,
            drone_index,
            frame,
        }
    }
}

pub fn send(
    channel: &mut ChannelModel,
    budget: &LatencyBudget,
    frame: MspFrame,
    drone_index: u8,
    t_now: f64,
) -> Delivery {
    channel.send(budget, frame, drone_index, t_now)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::msp::command_frame;
    use crate::vehicle::CommandMessage;
    use proptest::prelude::*;

    fn frame() -> MspFrame {
        command_frame(&CommandMessage::neutral(0)).unwrap()
    }

    #[test]
    fn default_total() {
        assert_eq!(total_latency(&LatencyBudget::default()), 341.33);
        assert_eq!(total_latency(&LatencyBudget::zero()), 0.0);
    }

    #[test]
    fn transport_delay() {
        let mut ch = ChannelModel::ideal();
        match send(&mut ch, &LatencyBudget::default(), frame(), 0, 1.0) {
            Delivery::Delivered { t_deliver, .. } => assert!((t_deliver - 1.194).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn certain_drop() {
        let mut ch = ChannelModel::new(0.0, 1.0, 3).unwrap();
        assert!(matches!(
            ch.send(&LatencyBudget::default(), frame(), 0, 0.0),
            Delivery::Dropped { .. }
        ));
    }

    #[test]
    fn seeded_channel_is_repeatable() {
        let run = || {
            let mut ch = ChannelModel::new(15.0, 0.2, 9).unwrap();
            (0..50)
                .map(|k| ch.send(&LatencyBudget::default(), frame(), (k % 3) as u8, k as f64 * 0.1))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    proptest! {
        #[test]
        fn doubling_doubles_total(c in proptest::array::uniform6(0.0..500.0f64)) {
            let b = LatencyBudget {
                frame_capture: c[0], marker_detection: c[1], drone_identification: c[2],
                pid_loop: c[3], msp_packet: c[4], communication: c[5],
            };
            let t = total_latency(&b);
            prop_assert!((total_latency(&b.scaled(2.0)) - 2.0 * t).abs() < 0.01);
        }

        #[test]
        fn per_destination_order(jitter in 0.0..200.0f64, seed in any::<u64>(),
                                 sends in proptest::collection::vec((0u8..3, 0.0..0.05f64), 1..60)) {
            let mut ch = ChannelModel::new(jitter, 0.0, seed).unwrap();
            let mut t = 0.0;
            let mut last = [f64::NEG_INFINITY; 3];
            for (dest, gap) in sends {
                t += gap;
                if let Delivery::Delivered { t_deliver, drone_index, .. } = ch.send(&LatencyBudget::default(), frame(), dest, t) {
                    prop_assert!(t_deliver >= last[drone_index as usize]);
                    prop_assert!(t_deliver >= t);
                    last[drone_index as usize] = t_deliver;
                }
            }
        }
    }
}
