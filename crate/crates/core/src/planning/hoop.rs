use serde::{Deserialize, Serialize};

use super::{rrt_star, PathPlan, PlanError, RrtConfig, Scene3D};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Leg {
    Approach,
    Through,
    Depart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoopLeg {
    pub hoop: usize,
    pub leg: Leg,
    pub plan: PathPlan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoopTraversalConfig {
    /// Distance along the axis of the entry and exit points from the hoop center.
    pub standoff: f64,
    pub rrt: RrtConfig,
}

impl Default for HoopTraversalConfig {
    fn default() -> Self {
        Self {
            standoff: 1.2,
            rrt: RrtConfig::default(),
        }
    }
}

/// Three plans per hoop: to the entry point, through the opening along the
/// axis, and away to the next staging point (or `end` after the last hoop).
pub fn hoop_traversal_plan(
    scene: &Scene3D,
    order: &[usize],
    start: Vec3,
    end: Option<Vec3>,
    cfg: &HoopTraversalConfig,
) -> Result<Vec<HoopLeg>, PlanError> {
    let mut legs = Vec::with_capacity(order.len() * 3);
    let mut here = start;
    for (k, &idx) in order.iter().enumerate() {
        let hoop = scene.hoops.get(idx).ok_or(PlanError::UnknownHoop(idx))?;
        let entry = hoop.entry(cfg.standoff);
        let exit = hoop.exit(cfg.standoff);
        let depart_to = match order.get(k + 1) {
            Some(&next) => {
                let next = scene.hoops.get(next).ok_or(PlanError::UnknownHoop(next))?;
                (exit + next.entry(cfg.standoff)) * 0.5
            }
            None => end.unwrap_or_else(|| scene.bounds.clamp(&hoop.exit(2.0 * cfg.standoff))),
        };
        let wrap = |e: PlanError| PlanError::HoopFailed {
            hoop: idx,
            source: Box::new(e),
        };
        let seed = cfg.rrt.seed.wrapping_add(3 * k as u64);
        for (leg, from, to, offset) in [
            (Leg::Approach, here, entry, 0),
            (Leg::Through, entry, exit, 1),
            (Leg::Depart, exit, depart_to, 2),
        ] {
            let mut rc = cfg.rrt;
            rc.seed = seed + offset;
            if leg == Leg::Through {
                rc.direct_connect = true;
            }
            let plan = rrt_star(scene, from, to, &rc).map_err(wrap)?.plan;
            legs.push(HoopLeg { hoop: idx, leg, plan });
        }
        here = depart_to;
    }
    Ok(legs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{Aabb, Hoop};

    fn scene(hoops: Vec<Hoop>) -> Scene3D {
        Scene3D {
            bounds: Aabb::new(Vec3::new(-8.0, -5.0, 25.0), Vec3::new(8.0, 5.0, 33.0)),
            hoops,
            boxes: Vec::new(),
        }
    }

    #[test]
    fn no_hoops_no_plans() {
        let legs = hoop_traversal_plan(&scene(vec![]), &[], Vec3::new(0.0, 0.0, 29.0), None, &HoopTraversalConfig::default())
            .unwrap();
        assert!(legs.is_empty());
    }

    #[test]
    fn one_hoop_three_plans() {
        let h = Hoop::new(Vec3::new(0.0, 0.0, 29.0), Vec3::x(), 2.0, 0.2);
        let s = scene(vec![h]);
        let legs = hoop_traversal_plan(&s, &[0], Vec3::new(-6.0, 2.0, 28.0), None, &HoopTraversalConfig::default())
            .unwrap();
        assert_eq!(legs.len(), 3);
        for p in legs[1].plan.points() {
            assert!(h.cylindrical(&p).1 < h.inner_radius);
        }
        for leg in &legs {
            assert!(leg.plan.waypoints.len() >= 50);
            assert!(s.first_collision(&leg.plan.points(), 0.6, 0.05).is_none());
        }
    }
}
