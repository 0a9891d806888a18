use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{path_length, resample_checked, to_setpoint, PathPlan, PlanError, Scene3D, MIN_WAYPOINTS};
use crate::geometry::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RrtConfig {
    pub step: f64,
    pub goal_bias: f64,
    pub gamma: f64,
    pub max_iterations: usize,
    /// Wall-clock cap in seconds.
    pub max_time: f64,
    pub seed: u64,
    pub drone_radius: f64,
    /// Extra clearance the planner keeps beyond the drone radius.
    pub margin: f64,
    /// Sampling resolution of the planner's own edge checks.
    pub check_step: f64,
    /// Return the straight segment when it is already free.
    pub direct_connect: bool,
    pub min_waypoints: usize,
}

impl Default for RrtConfig {
    fn default() -> Self {
        Self {
            step: 0.5,
            goal_bias: 0.05,
            gamma: 2.0,
            max_iterations: 3000,
            max_time: 20.0,
            seed: 0,
            drone_radius: 0.6,
            margin: 0.1,
            check_step: 0.1,
            direct_connect: true,
            min_waypoints: MIN_WAYPOINTS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RrtResult {
    pub plan: PathPlan,
    /// Raw tree path before resampling.
    pub raw: Vec<Vec3>,
    /// Best goal-reaching cost after each iteration; infinite until first connection.
    pub cost_history: Vec<f64>,
}

struct Node {
    p: Vec3,
    parent: Option<usize>,
    cost: f64,
    children: Vec<usize>,
}

struct Tree<'a> {
    scene: &'a Scene3D,
    cfg: &'a RrtConfig,
    nodes: Vec<Node>,
}

impl Tree<'_> {
    fn free(&self, p: &Vec3) -> bool {
        self.scene.collision_free(p, self.cfg.drone_radius + self.cfg.margin)
    }

    fn edge_free(&self, a: &Vec3, b: &Vec3) -> bool {
        self.scene
            .segment_free(a, b, self.cfg.drone_radius + self.cfg.margin, self.cfg.check_step)
    }

    fn nearest(&self, p: &Vec3) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, n) in self.nodes.iter().enumerate() {
            let d = (n.p - p).norm_squared();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    fn near(&self, p: &Vec3, radius: f64) -> Vec<usize> {
        let r2 = radius * radius;
        (0..self.nodes.len())
            .filter(|&i| (self.nodes[i].p - p).norm_squared() <= r2)
            .collect()
    }

    fn neighbor_radius(&self) -> f64 {
        let n = self.nodes.len().max(2) as f64;
        let unit_ball = 4.0 / 3.0 * PI;
        let scale = (self.scene.bounds.volume() / unit_ball).cbrt();
        self.cfg.gamma * scale * (n.ln() / n).cbrt()
    }

    fn reparent(&mut self, child: usize, parent: usize) {
        if let Some(old) = self.nodes[child].parent {
            self.nodes[old].children.retain(|&c| c != child);
        }
        self.nodes[child].parent = Some(parent);
        self.nodes[parent].children.push(child);
        let cost = self.nodes[parent].cost + (self.nodes[child].p - self.nodes[parent].p).norm();
        self.set_cost(child, cost);
    }

    fn set_cost(&mut self, root: usize, cost: f64) {
        let delta = cost - self.nodes[root].cost;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            self.nodes[i].cost += delta;
            stack.extend(self.nodes[i].children.iter().copied());
        }
    }

    fn path_to(&self, mut i: usize) -> Vec<Vec3> {
        let mut out = vec![self.nodes[i].p];
        while let Some(p) = self.nodes[i].parent {
            out.push(self.nodes[p].p);
            i = p;
        }
        out.reverse();
        out
    }
}

fn finish(
    scene: &Scene3D,
    cfg: &RrtConfig,
    raw: Vec<Vec3>,
    started: Instant,
    iterations: usize,
    cost_history: Vec<f64>,
) -> Result<RrtResult, PlanError> {
    let cost = path_length(&raw);
    let points = if raw.len() == 1 {
        vec![raw[0]; cfg.min_waypoints.max(1)]
    } else {
        resample_checked(scene, &raw, cfg.min_waypoints, cfg.drone_radius)?
    };
    Ok(RrtResult {
        plan: PathPlan {
            waypoints: points.iter().map(to_setpoint).collect(),
            cost,
            planning_time: started.elapsed().as_secs_f64(),
            iterations,
        },
        raw,
        cost_history,
    })
}

/// Asymptotically optimal RRT* between two free points.
pub fn rrt_star(scene: &Scene3D, start: Vec3, goal: Vec3, cfg: &RrtConfig) -> Result<RrtResult, PlanError> {
    let started = Instant::now();
    let tree_radius = cfg.drone_radius + cfg.margin;
    if !scene.collision_free(&start, tree_radius) {
        return Err(PlanError::InvalidEndpoint("start"));
    }
    if !scene.collision_free(&goal, tree_radius) {
        return Err(PlanError::InvalidEndpoint("goal"));
    }
    if start == goal {
        return finish(scene, cfg, vec![start], started, 0, Vec::new());
    }
    let mut tree = Tree {
        scene,
        cfg,
        nodes: vec![Node {
            p: start,
            parent: None,
            cost: 0.0,
            children: Vec::new(),
        }],
    };
    if cfg.direct_connect && tree.edge_free(&start, &goal) {
        return finish(scene, cfg, vec![start, goal], started, 0, Vec::new());
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let b = scene.bounds;
    let mut goal_parents: Vec<usize> = Vec::new();
    let mut history = Vec::with_capacity(cfg.max_iterations);
    let best = |tree: &Tree, parents: &[usize]| {
        parents
            .iter()
            .map(|&i| (tree.nodes[i].cost + (tree.nodes[i].p - goal).norm(), i))
            .min_by(|a, b| a.0.total_cmp(&b.0))
    };

    let mut iterations = 0;
    while iterations < cfg.max_iterations && started.elapsed().as_secs_f64() < cfg.max_time {
        iterations += 1;
        let sample = if rng.random::<f64>() < cfg.goal_bias {
            goal
        } else {
            Vec3::new(
                rng.random_range(b.min.x..=b.max.x),
                rng.random_range(b.min.y..=b.max.y),
                rng.random_range(b.min.z..=b.max.z),
            )
        };
        let nearest = tree.nearest(&sample);
        let from = tree.nodes[nearest].p;
        let dir = sample - from;
        let dist = dir.norm();
        if dist < 1e-12 {
            history.push(best(&tree, &goal_parents).map_or(f64::INFINITY, |b| b.0));
            continue;
        }
        let new = if dist > cfg.step { from + dir * (cfg.step / dist) } else { sample };
        if !tree.free(&new) || !tree.edge_free(&from, &new) {
            history.push(best(&tree, &goal_parents).map_or(f64::INFINITY, |b| b.0));
            continue;
        }

        let radius = tree.neighbor_radius().max(cfg.step);
        let near = tree.near(&new, radius);
        let mut parent = nearest;
        let mut cost = tree.nodes[nearest].cost + (new - from).norm();
        let mut free_near = Vec::with_capacity(near.len());
        for &i in &near {
            let p = tree.nodes[i].p;
            let ok = i == nearest || tree.edge_free(&p, &new);
            if ok {
                free_near.push(i);
                let c = tree.nodes[i].cost + (new - p).norm();
                if c < cost {
                    cost = c;
                    parent = i;
                }
            }
        }
        let id = tree.nodes.len();
        tree.nodes.push(Node {
            p: new,
            parent: Some(parent),
            cost,
            children: Vec::new(),
        });
        tree.nodes[parent].children.push(id);

        for &i in &free_near {
            if i == parent {
                continue;
            }
            let c = cost + (tree.nodes[i].p - new).norm();
            if c + 1e-12 < tree.nodes[i].cost {
                tree.reparent(i, id);
            }
        }

        if (new - goal).norm() <= cfg.step && tree.edge_free(&new, &goal) {
            goal_parents.push(id);
        }
        history.push(best(&tree, &goal_parents).map_or(f64::INFINITY, |b| b.0));
    }

    match best(&tree, &goal_parents) {
        Some((_, i)) => {
            let mut raw = tree.path_to(i);
            if raw.last() != Some(&goal) {
                raw.push(goal);
            }
            finish(scene, cfg, raw, started, iterations, history)
        }
        None => Err(PlanError::NoPathFound { iterations }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planning::{Aabb, Hoop};

    fn open() -> Scene3D {
        Scene3D::empty(Aabb::new(Vec3::new(-8.0, -5.0, 25.0), Vec3::new(8.0, 5.0, 33.0)))
    }

    #[test]
    fn direct_connection_in_open_space() {
        let s = open();
        let a = Vec3::new(-6.0, -3.0, 27.0);
        let b = Vec3::new(6.0, 3.0, 31.0);
        let r = rrt_star(&s, a, b, &RrtConfig::default()).unwrap();
        assert!(r.plan.cost <= 1.05 * (b - a).norm());
        assert_eq!(r.plan.waypoints.len(), 50);
    }

    #[test]
    fn tree_search_in_open_space() {
        let s = open();
        let a = Vec3::new(-6.0, -3.0, 27.0);
        let b = Vec3::new(6.0, 3.0, 31.0);
        let cfg = RrtConfig {
            direct_connect: false,
            max_iterations: 4000,
            seed: 3,
            ..RrtConfig::default()
        };
        let r = rrt_star(&s, a, b, &cfg).unwrap();
        assert!(r.plan.cost <= 1.05 * (b - a).norm(), "cost {} vs {}", r.plan.cost, (b - a).norm());
        for w in r.cost_history.windows(2) {
            assert!(w[1] <= w[0]);
        }
    }

    #[test]
    fn start_equals_goal() {
        let p = Vec3::new(0.0, 0.0, 29.0);
        let r = rrt_star(&open(), p, p, &RrtConfig::default()).unwrap();
        assert_eq!(r.plan.cost, 0.0);
        assert_eq!(r.plan.waypoints.len(), 50);
    }

    #[test]
    fn sealed_goal() {
        let mut s = open();
        // a shell of boxes around the goal
        let g = Vec3::new(4.0, 0.0, 29.0);
        let (lo, hi) = (g - Vec3::repeat(2.5), g + Vec3::repeat(2.5));
        for axis in 0..3 {
            for side in [lo[axis], hi[axis]] {
                let mut min = lo;
                let mut max = hi;
                min[axis] = side - 0.1;
                max[axis] = side + 0.1;
                s.boxes.push(Aabb::new(min, max));
            }
        }
        let cfg = RrtConfig {
            max_iterations: 300,
            ..RrtConfig::default()
        };
        assert_eq!(
            rrt_star(&s, Vec3::new(-6.0, 0.0, 29.0), g, &cfg),
            Err(PlanError::NoPathFound { iterations: 300 })
        );
    }

    #[test]
    fn colliding_endpoint() {
        let mut s = open();
        s.hoops.push(Hoop::new(Vec3::new(0.0, 0.0, 29.0), Vec3::x(), 2.0, 0.2));
        let err = rrt_star(&s, Vec3::new(0.0, 4.0, 29.0), Vec3::new(3.0, 0.0, 29.0), &RrtConfig::default());
        assert_eq!(err, Err(PlanError::InvalidEndpoint("start")));
    }

    #[test]
    fn plans_through_a_hoop() {
        let mut s = open();
        s.hoops.push(Hoop::new(Vec3::new(0.0, 0.0, 29.0), Vec3::x(), 2.0, 0.2));
        let a = Vec3::new(-4.0, 3.0, 27.0);
        let b = Vec3::new(4.0, -3.0, 31.0);
        let r = rrt_star(&s, a, b, &RrtConfig { seed: 1, ..RrtConfig::default() }).unwrap();
        let pts = r.plan.points();
        assert!(s.first_collision(&pts, 0.6, 0.05).is_none());
        assert!(pts.windows(2).any(|w| s.hoops[0].passes_through(&w[0], &w[1])));
    }
}
