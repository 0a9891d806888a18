use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Rotation3;
use nanonav::geometry::{correct_z, fit_ellipsoid_z, units_to_meters, CameraModel, HomogeneousTransform, Vec3, WhyConPose};
use nanonav::harness::{self, ScenarioConfig, ScenarioKind};
use nanonav::marker::{CountChange, TrackerState};
use nanonav::msp::{total_latency, LatencyBudget};
use nanonav::planning::{rrt_star, Aabb, Hoop, RrtConfig, Scene3D};
use nanonav::vehicle::{step_drone, CommandMessage, DriftModel, DroneState, VehicleParams};
use proptest::prelude::*;

fn arb_vec3(span: f64) -> impl Strategy<Value = Vec3> {
    (-span..span, -span..span, -span..span).prop_map(|(x, y, z)| Vec3::new(x, y, z))
}

fn arb_transform() -> impl Strategy<Value = HomogeneousTransform> {
    (-PI..PI, -PI..PI, -PI..PI, arb_vec3(10.0))
        .prop_map(|(r, p, y, t)| HomogeneousTransform::new(Rotation3::from_euler_angles(r, p, y), t))
}

fn close(a: &Vec3, b: &Vec3, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn composition_is_associative(a in arb_transform(), b in arb_transform(), c in arb_transform(), p in arb_vec3(10.0)) {
        let left = a.compose(&b).compose(&c).apply(&p);
        let right = a.compose(&b.compose(&c)).apply(&p);
        prop_assert!(close(&left, &right, 1e-9));
    }

    #[test]
    fn inverse_composes_to_identity(t in arb_transform(), p in arb_vec3(10.0)) {
        prop_assert!(close(&t.compose(&t.inverse()).apply(&p), &p, 1e-9));
        prop_assert!(close(&t.inverse().compose(&t).apply(&p), &p, 1e-9));
        prop_assert!(t.orthonormality_error() < 1e-9);
    }

    #[test]
    fn projection_roundtrip(x in -1.5..1.5f64, y in -1.0..1.0f64, depth in 0.5..8.0f64, height in 2.0..10.0f64) {
        let mut cam = CameraModel::overhead(height);
        cam.k1 = 0.0;
        cam.k2 = 0.0;
        let world = cam.camera_to_world(&Vec3::new(x, y, depth));
        let (u, v) = cam.project(&world).unwrap();
        let back = cam.back_project(u, v, depth).unwrap();
        prop_assert!((back - world).norm() < 1e-6);
    }

    #[test]
    fn ellipsoid_is_identity_on_flat_data(z in 5.0..60.0f64, span in 3.0..20.0f64, nx in 3usize..7, ny in 3usize..7) {
        let mut samples = Vec::new();
        for i in 0..nx {
            for j in 0..ny {
                let x = span * (2.0 * i as f64 / (nx - 1) as f64 - 1.0);
                let y = span * (2.0 * j as f64 / (ny - 1) as f64 - 1.0);
                samples.push((x, y, z));
            }
        }
        let fit = fit_ellipsoid_z(&samples).unwrap();
        for (x, y, zr) in samples {
            let corrected = correct_z(&fit, &WhyConPose::new(x, y, zr)).unwrap();
            prop_assert!((corrected.z - zr).abs() < 1e-3);
        }
    }

    #[test]
    fn unit_conversion_is_linear(p in arb_vec3(100.0), a in -50.0..50.0f64) {
        let scaled = units_to_meters(&WhyConPose::from_position(&(p * a)));
        let expected = units_to_meters(&WhyConPose::from_position(&p)) * a;
        prop_assert!((scaled - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
    }
}

/// Markers spread at least `gap` apart, each moved by less than `gap / 2`.
fn arb_scene(max: usize) -> impl Strategy<Value = (Vec<WhyConPose>, Vec<WhyConPose>)> {
    (1..=max)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec((-40.0..40.0f64, -30.0..30.0f64, 10.0..40.0f64), n),
                proptest::collection::vec((0.0..1.0f64, -PI..PI, -1.0..1.0f64), n),
            )
        })
        .prop_filter_map("markers too close", |(starts, moves)| {
            let poses: Vec<WhyConPose> = starts
                .iter()
                .enumerate()
                .map(|(i, &(x, y, z))| WhyConPose::new(x, y, z).with_id(i as u32))
                .collect();
            let gap = poses
                .iter()
                .enumerate()
                .flat_map(|(i, a)| poses[i + 1..].iter().map(move |b| a.distance(b)))
                .fold(f64::INFINITY, f64::min);
            if gap < 1.0 {
                return None;
            }
            let moved = poses
                .iter()
                .zip(&moves)
                .map(|(p, &(r, th, dz))| {
                    let step = 0.49 * gap * r;
                    let (h, v) = (step * (1.0 - dz * dz).sqrt(), step * dz);
                    WhyConPose::new(p.x + h * th.cos(), p.y + h * th.sin(), p.z + v)
                })
                .collect();
            Some((poses, moved))
        })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for k in 0..=rest.len() {
            let mut p = rest.clone();
            p.insert(k, n - 1);
            out.push(p);
        }
    }
    out
}

fn labelled(tracker: &TrackerState) -> BTreeMap<u32, [u64; 3]> {
    tracker
        .tracks()
        .iter()
        .map(|t| (t.id, [t.pose.x.to_bits(), t.pose.y.to_bits(), t.pose.z.to_bits()]))
        .collect()
}

proptest! {
    #[test]
    fn tracking_ignores_detection_order((start, moved, shuffled) in arb_scene(4).prop_flat_map(|(s, m)| (Just(s), Just(m.clone()), Just(m).prop_shuffle()))) {
        let mut a = TrackerState::new(&start);
        let mut b = TrackerState::new(&start);
        let oa = a.track(&moved);
        let ob = b.track(&shuffled);
        if oa.ambiguities.is_empty() && ob.ambiguities.is_empty() {
            prop_assert_eq!(labelled(&a), labelled(&b));
        }
    }

    #[test]
    fn greedy_matches_brute_force((start, moved) in arb_scene(3)) {
        let mut tracker = TrackerState::new(&start);
        let outcome = tracker.track(&moved);
        let best = permutations(moved.len())
            .into_iter()
            .min_by(|p, q| {
                let cost = |perm: &Vec<usize>| perm.iter().enumerate().map(|(t, &d)| start[t].distance(&moved[d])).sum::<f64>();
                cost(p).total_cmp(&cost(q))
            })
            .unwrap();
        for (t, &d) in best.iter().enumerate() {
            prop_assert_eq!(outcome.detection_for(start[t].id), Some(d));
        }
    }

    #[test]
    fn count_adaptation_keeps_surviving_ids((start, _) in arb_scene(4), hidden in any::<proptest::sample::Index>(), window in 1u32..6) {
        let mut tracker = TrackerState::new(&start).with_miss_window(window);
        let gone = hidden.index(start.len());
        let visible: Vec<WhyConPose> = start.iter().enumerate().filter(|(i, _)| *i != gone).map(|(_, p)| *p).collect();
        let mut change = None;
        for _ in 0..window {
            tracker.track(&visible);
            change = tracker.adapt_count().or(change);
        }
        let dropped_ok = matches!(&change, Some(CountChange::Decreased { dropped, .. }) if dropped == &vec![start[gone].id]);
        prop_assert!(dropped_ok);
        for p in &visible {
            let t = tracker.get(p.id);
            prop_assert!(t.is_some());
            prop_assert_eq!(t.unwrap().pose.position(), p.position());
        }
        prop_assert_eq!(tracker.tracks().len(), visible.len());
        prop_assert_eq!(tracker.expected_count, visible.len());
    }
}

fn arb_command() -> impl Strategy<Value = CommandMessage> {
    proptest::array::uniform4(0u16..3000).prop_map(|[r, p, t, y]| CommandMessage {
        rc_roll: r,
        rc_pitch: p,
        rc_throttle: t,
        rc_yaw: y,
        ..CommandMessage::arm(0)
    })
}

proptest! {
    #[test]
    fn attitude_stays_saturated(cmds in proptest::collection::vec(arb_command(), 1..200), dt in 0.001..0.05f64) {
        let params = VehicleParams::default();
        let limit = params.max_tilt_deg.to_radians() + 1e-12;
        let mut s = DroneState::hovering(0, Vec3::new(0.0, 0.0, 1.0));
        let mut drift = DriftModel::off();
        for cmd in &cmds {
            s = step_drone(&s, cmd, dt, &params, &mut drift).unwrap();
            prop_assert!(s.roll.abs() <= limit && s.pitch.abs() <= limit);
        }
    }

    #[test]
    fn vehicle_step_is_deterministic(cmds in proptest::collection::vec(arb_command(), 1..50), dt in 0.001..0.05f64, seed in any::<u64>()) {
        let params = VehicleParams::default();
        let run = || {
            let mut s = DroneState::hovering(0, Vec3::new(0.5, -0.2, 1.0));
            let mut drift = DriftModel::new(0.02, 0.01, seed);
            for cmd in &cmds {
                s = step_drone(&s, cmd, dt, &params, &mut drift).unwrap();
            }
            s
        };
        prop_assert_eq!(run(), run());
    }
}

/// Independent distance from `p` to a hoop's torus and its surrounding wall.
fn hoop_gap(h: &Hoop, p: &Vec3) -> f64 {
    let d = p - h.center;
    let axial = d.dot(&h.axis);
    let radial = (d - h.axis * axial).norm();
    let ring = h.inner_radius + h.tube_radius;
    let torus = (radial - ring).hypot(axial) - h.tube_radius;
    let wall = (ring - radial).max(0.0).hypot((axial.abs() - h.tube_radius).max(0.0));
    torus.min(wall)
}

fn dense_free(scene: &Scene3D, points: &[Vec3], radius: f64) -> bool {
    points.windows(2).all(|w| {
        let n = ((w[1] - w[0]).norm() / 0.05).ceil().max(1.0) as usize;
        (0..=n).all(|k| {
            let p = w[0] + (w[1] - w[0]) * (k as f64 / n as f64);
            let inside = (0..3).all(|i| (scene.bounds.min[i]..=scene.bounds.max[i]).contains(&p[i]));
            inside && scene.hoops.iter().all(|h| hoop_gap(h, &p) > radius)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn plans_are_collision_free(seed in any::<u64>(), sy in -3.0..3.0f64, gy in -3.0..3.0f64, hz in -1.0..1.0f64) {
        let scene = Scene3D {
            bounds: Aabb::new(Vec3::new(-8.0, -5.0, -4.0), Vec3::new(8.0, 5.0, 4.0)),
            hoops: vec![Hoop::new(Vec3::new(0.0, 0.0, hz), Vec3::new(1.0, 0.0, 0.0), 1.8, 0.15)],
            boxes: Vec::new(),
        };
        let cfg = RrtConfig { seed, max_iterations: 1500, ..RrtConfig::default() };
        let start = Vec3::new(-5.0, sy, 0.0);
        let goal = Vec3::new(5.0, gy, 0.0);
        let Ok(r) = rrt_star(&scene, start, goal, &cfg) else {
            return Ok(());
        };
        prop_assert!(dense_free(&scene, &r.plan.points(), cfg.drone_radius));
        prop_assert!(r.cost_history.windows(2).all(|w| w[1] <= w[0] || w[0].is_infinite()));
        prop_assert!(r.plan.waypoints.len() >= cfg.min_waypoints);
    }
}

fn short_hold(seed: u64, duration: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::preset(ScenarioKind::PositionHold);
    cfg.seed = seed;
    cfg.duration = duration;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn reruns_are_byte_identical(seed in any::<u64>(), kind in proptest::sample::select(ScenarioKind::ALL.to_vec())) {
        let mut cfg = ScenarioConfig::preset(kind);
        cfg.seed = seed;
        let a = harness::run(&cfg);
        let b = harness::run(&cfg);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.log.to_csv(), b.log.to_csv()),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "one run failed and the other did not"),
        }
    }

    #[test]
    fn commands_act_only_after_the_latency_budget(seed in any::<u64>(), jitter in 0.0..30.0f64) {
        let mut cfg = short_hold(seed, 15.0);
        cfg.latency.pid_jitter_ms = jitter;
        let budget = cfg.latency.budget;
        let floor = budget.perception() + budget.transport();
        let sim = harness::run(&cfg).unwrap().sim.unwrap();
        prop_assert!(!sim.delays.is_empty());
        for (capture, actuate) in &sim.delays {
            prop_assert!(actuate - capture >= floor - 1e-9);
        }
    }

    #[test]
    fn full_budget_bounds_end_to_end_delay(seed in any::<u64>()) {
        let mut cfg = short_hold(seed, 15.0);
        cfg.latency.pid_jitter_ms = 0.0;
        cfg.latency.channel_jitter_ms = 0.0;
        let total = total_latency(&cfg.latency.budget) / 1000.0;
        prop_assert_eq!(cfg.latency.budget, LatencyBudget::default());
        let sim = harness::run(&cfg).unwrap().sim.unwrap();
        for (capture, actuate) in &sim.delays {
            prop_assert!(actuate - capture >= total - 1e-9);
        }
    }

    #[test]
    fn control_ticks_respect_sample_time(seed in any::<u64>(), kind in proptest::sample::select(ScenarioKind::ALL.to_vec())) {
        let mut cfg = ScenarioConfig::preset(kind);
        cfg.seed = seed;
        let st = cfg.loop_timing().unwrap().sample_time;
        if let Ok(out) = harness::run(&cfg) {
            let times: Vec<f64> = out.log.drone(0).map(|r| r.t).collect();
            prop_assert!(times.windows(2).all(|w| w[1] - w[0] >= st - 1e-9));
        }
    }
}
