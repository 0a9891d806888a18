use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nanonav::control::{
    iterative_autotune, overshoot, relay_tune, step_response, zn_gains, AutotuneConfig, AxisRanges, ControlError,
    ControllerType, FirstOrderSurrogate, RelayConfig, RelayTuneResult, SecondOrderPlant,
};
use nanonav::geometry::{CameraModel, UnitScale, Vec3};
use nanonav::harness::{self, formation_angle, landing_scenario, ScenarioConfig, ScenarioKind, ScenarioOutcome};
use nanonav::marker::{localize, render, Detector, MarkerPlacement, MarkerSpec};
use nanonav::msp::{decode, decode_command, encode, from_hex, total_latency, Direction, LatencyBudget, MspFrame};
use nanonav::planning::{Hoop, Scene3D, MIN_WAYPOINTS};
use nanonav::vehicle::CommandMessage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const WALL_LIMIT: Duration = Duration::from_secs(60);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn timed(kind: ScenarioKind) -> (ScenarioOutcome, Duration) {
    let cfg = ScenarioConfig::preset(kind);
    let start = Instant::now();
    let out = harness::run(&cfg).unwrap_or_else(|e| panic!("{kind}: {e}"));
    (out, start.elapsed())
}

fn share_within(values: &[f64], lo: f64, hi: f64) -> f64 {
    values.iter().filter(|v| (lo..=hi).contains(*v)).count() as f64 / values.len() as f64
}

fn position_hold() -> Verdict {
    // (axis, low, high): pitch moves x, roll moves y
    let bands = [("pitch", 0, -0.1, 1.8), ("roll", 1, -0.9, 0.8), ("altitude", 2, -2.2, 2.0)];
    let (out, wall) = timed(ScenarioKind::PositionHold);
    let settle = out.config.hold.settle;
    let rows: Vec<[f64; 3]> = out.log.drone(0).filter(|r| r.t >= settle).filter_map(|r| r.error).collect();
    let span = out.log.drone(0).last().map_or(0.0, |r| r.t) - settle;
    let mut pass = span >= 60.0 && wall < WALL_LIMIT;
    let mut parts = vec![format!("{span:.1} s held")];
    for (name, k, lo, hi) in bands {
        let trace: Vec<f64> = rows.iter().map(|e| e[k]).collect();
        let within = share_within(&trace, lo, hi);
        let hard = share_within(&trace, 2.0 * lo, 2.0 * hi);
        pass &= within >= 0.95 && hard == 1.0;
        parts.push(format!("{name} {:.1}% in band, {:.1}% in 2x band", 100.0 * within, 100.0 * hard));
    }
    verdict(pass, parts.join(", "))
}

fn internal_drift() -> Verdict {
    let (out, wall) = timed(ScenarioKind::InternalOnlyDrift);
    let exit = out.log.drone(0).find(|r| !r.in_fov).map(|r| r.t);
    let peak = out
        .log
        .drone(0)
        .take_while(|r| exit.is_none_or(|t| r.t < t))
        .filter_map(|r| r.truth_error())
        .fold([0.0f64; 3], |m, e| [0, 1, 2].map(|k| m[k].max(e[k].abs())));
    let pass = exit.is_some() && peak.iter().any(|p| *p >= 3.0) && wall < WALL_LIMIT;
    verdict(
        pass,
        format!("left the frame at {exit:?} s, pre-exit peak error x {:.2} y {:.2} z {:.2}", peak[0], peak[1], peak[2]),
    )
}

fn localization() -> Verdict {
    // mounted 5.5 m up so camera depths of 2 to 5 m stay above the floor
    let cam = CameraModel::overhead(5.5);
    let spec = MarkerSpec::default();
    let scale = UnitScale::default();
    let detector = Detector::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut errors, mut missed) = (Vec::new(), 0);
    while errors.len() < 150 {
        let u = rng.random_range(0.1..0.9) * cam.width as f64;
        let v = rng.random_range(0.1..0.9) * cam.height as f64;
        let depth = rng.random_range(2.0..5.0);
        let world = cam.back_project(u, v, depth).expect("in front of the camera");
        let truth = scale.meters_to_units(&cam.world_to_camera(&world));
        let frame = render(&[MarkerPlacement::level(spec, world)], &cam);
        let Some(d) = detector.detect(&frame, 1).first().copied() else {
            missed += 1;
            continue;
        };
        let pose = localize(&d, &cam, &spec, &scale).expect("localizes");
        errors.push(((pose.x - truth.x).powi(2) + (pose.y - truth.y).powi(2)).sqrt());
    }
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    let ideal = CameraModel::default();
    let at = |x: f64| {
        let m = MarkerPlacement::level(spec, Vec3::new(x, -0.3, 1.0));
        let d = detector.detect(&render(&[m], &ideal), 1)[0];
        localize(&d, &ideal, &spec, &scale).unwrap()
    };
    let shift = (at(0.25).x - at(0.15).x).abs();
    let pass = mean <= 0.31 && missed == 0 && (shift - 1.0).abs() <= 0.05;
    verdict(
        pass,
        format!("mean xy error {mean:.3} units over {} poses ({missed} missed), 0.10 m shift reads {shift:.3} units", errors.len()),
    )
}

/// Phase crossover of the surrogate plant, found from its closed-form response.
fn surrogate_ultimate() -> (f64, f64) {
    let phase = |w: f64| -w * 1.0 - w.atan() - (0.5 * w).atan() + PI;
    let (mut lo, mut hi) = (0.01, 10.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phase(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let w = 0.5 * (lo + hi);
    let ku = (1.0 + w * w).sqrt() * (1.0 + 0.25 * w * w).sqrt();
    (ku, 2.0 * PI / w)
}

fn zn_table() -> Verdict {
    let (ku, tu) = (7.3, 2.9);
    // Kp factor, Ti divisor, Td as a fraction of Tu
    let table = [
        (ControllerType::P, 0.5, None, None),
        (ControllerType::PI, 0.5, Some(1.25), None),
        (ControllerType::PD, 0.8, None, Some(1.0 / 8.0)),
        (ControllerType::ClassicPid, 0.6, Some(2.0), Some(1.0 / 8.0)),
        (ControllerType::PessenIntegral, 0.7, Some(2.5), Some(3.0 / 20.0)),
        (ControllerType::SomeOvershoot, 0.33, Some(2.0), Some(1.0 / 3.0)),
        (ControllerType::NoOvershoot, 0.2, Some(2.0), Some(1.0 / 3.0)),
    ];
    let r = RelayTuneResult::from_ultimate(ku, tu);
    let mut rows_ok = 0;
    for (c, kp_factor, ti_div, td_frac) in table {
        let kp = kp_factor * ku;
        let ki = ti_div.map_or(0.0, |d| kp / (tu / d));
        let kd = td_frac.map_or(0.0, |f| kp * f * tu);
        let g = zn_gains(&r, c);
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
        if close(g.kp, kp) && close(g.ki, ki) && close(g.kd, kd) {
            rows_ok += 1;
        }
    }
    let (ku_true, tu_true) = surrogate_ultimate();
    let dt = 0.001;
    let relay = RelayConfig {
        setpoint: 0.5,
        amplitude: 1.0,
        dt,
        ..RelayConfig::default()
    };
    let measured = relay_tune(&mut SecondOrderPlant::new(1.0, 1.0, 0.5, 1.0, dt), relay);
    let (pass_relay, relay_text) = match measured {
        Ok(m) => {
            let rel = (m.ku - ku_true).abs() / ku_true;
            (rel < 0.15, format!("relay Ku {:.3} vs analytic {ku_true:.3} ({:.1}% off), Tu {:.2} vs {tu_true:.2}", m.ku, 100.0 * rel, m.tu))
        }
        Err(e) => (false, format!("relay failed: {e}")),
    };
    verdict(rows_ok == 7 && pass_relay, format!("{rows_ok}/7 table rows exact, {relay_text}"))
}

fn overshoot_ordering() -> Verdict {
    let dt = 0.002;
    let (ku, tu) = surrogate_ultimate();
    let r = RelayTuneResult::from_ultimate(ku, tu);
    let os = [ControllerType::NoOvershoot, ControllerType::SomeOvershoot, ControllerType::ClassicPid].map(|c| {
        let mut plant = SecondOrderPlant::new(1.0, 1.0, 0.5, 1.0, dt);
        overshoot(&step_response(&mut plant, &zn_gains(&r, c), 1.0, 60.0, dt), 1.0)
    });
    let pass = os[0] <= os[1] && os[1] <= os[2] && os[0] <= 0.05;
    verdict(
        pass,
        format!(
            "no overshoot {:.1}%, some overshoot {:.1}%, classic PID {:.1}%",
            100.0 * os[0],
            100.0 * os[1],
            100.0 * os[2]
        ),
    )
}

fn autotune() -> Verdict {
    let generous = AutotuneConfig::new([AxisRanges::new((0.0, 30.0), (0.0, 50.0), (0.0, 2.0)); 3]);
    let tuned = iterative_autotune(&mut FirstOrderSurrogate::new(1.0, 0.5), &generous);
    let empty = AutotuneConfig::new([AxisRanges::new((0.0, 0.0), (0.0, 0.0), (0.0, 0.0)); 3]);
    let exhausted = iterative_autotune(&mut FirstOrderSurrogate::new(1.0, 0.5), &empty);
    let exhausted_ok = matches!(exhausted, Err(ControlError::RangeExhausted { .. }));
    match tuned {
        Ok(report) => {
            let e = report.final_errors();
            let pass = e.iter().all(|v| *v < generous.threshold_prime) && exhausted_ok;
            verdict(
                pass,
                format!(
                    "steady errors {:.3} {:.3} {:.3} < {} after {} trials, empty ranges give RangeExhausted: {exhausted_ok}",
                    e[0],
                    e[1],
                    e[2],
                    generous.threshold_prime,
                    report.history.len()
                ),
            )
        }
        Err(e) => verdict(false, format!("autotune failed: {e}")),
    }
}

fn latency() -> Verdict {
    let total = total_latency(&LatencyBudget::default());
    let mut cfg = ScenarioConfig::preset(ScenarioKind::PositionHold);
    cfg.latency.pid_jitter_ms = 0.0;
    cfg.latency.channel_jitter_ms = 0.0;
    cfg.duration = 20.0;
    let out = harness::run(&cfg).expect("hold runs");
    let sim = out.sim.expect("sim output");
    let tick = 1.0 / cfg.camera.fps;
    let worst = sim
        .delays
        .iter()
        .map(|(capture, actuate)| (actuate - capture - total / 1000.0).abs())
        .fold(0.0f64, f64::max);
    let pass = total == 341.33 && !sim.delays.is_empty() && worst <= tick;
    verdict(
        pass,
        format!("budget {total} ms, {} commands, worst end-to-end deviation {:.3} ms (one tick {:.3} ms)", sim.delays.len(), 1e3 * worst, 1e3 * tick),
    )
}

fn random_command(rng: &mut ChaCha8Rng) -> CommandMessage {
    let ch = [0; 8].map(|_| rng.random_range(1000..=2000u16));
    CommandMessage::from_channels(ch, rng.random())
}

fn msp() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut identity = 0;
    let n = 10_000;
    for _ in 0..n {
        let direction = if rng.random() { Direction::ToDrone } else { Direction::FromDrone };
        let id: u8 = rng.random();
        let len = if id == 200 && direction == Direction::ToDrone { 16 } else { rng.random_range(0..=255usize) };
        let payload: Vec<u8> = (0..len).map(|_| rng.random()).collect();
        let frame = MspFrame::new(direction, id, payload).unwrap();
        let back = decode(&frame.to_bytes());
        if back == vec![Ok(frame)] {
            identity += 1;
        }
    }
    let mut commands_ok = 0;
    let mut corrupted = 0;
    let mut detected = 0;
    for _ in 0..500 {
        let cmd = random_command(&mut rng);
        let bytes = encode(&cmd).unwrap();
        if let [Ok(f)] = decode(&bytes).as_slice() {
            if decode_command(f, cmd.drone_index) == Ok(cmd) {
                commands_ok += 1;
            }
        }
        // size, id, payload and checksum bytes
        for pos in 4..bytes.len() {
            let mut bad = bytes.clone();
            let flip: u8 = rng.random_range(1..=255);
            bad[pos] ^= flip;
            corrupted += 1;
            if decode(&bad).iter().any(|r| r.is_err()) {
                detected += 1;
            }
        }
    }
    let fixtures = [
        ("rc_neutral", CommandMessage::neutral(0)),
        ("rc_arm", CommandMessage::arm(0)),
        ("rc_disarm", CommandMessage::disarm(0)),
        (
            "rc_mixed",
            CommandMessage {
                rc_roll: 1423,
                rc_pitch: 1618,
                rc_throttle: 1587,
                rc_aux4: 2000,
                ..CommandMessage::neutral(0)
            },
        ),
    ];
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/msp");
    let mut golden = 0;
    for (name, cmd) in fixtures {
        let text = std::fs::read_to_string(format!("{dir}/{name}.hex")).expect("fixture");
        if from_hex(&text).unwrap() == encode(&cmd).unwrap() {
            golden += 1;
        }
    }
    let pass = identity == n && commands_ok == 500 && detected == corrupted && golden == fixtures.len();
    verdict(
        pass,
        format!(
            "{identity}/{n} frames roundtrip, {commands_ok}/500 commands roundtrip, {detected}/{corrupted} corruptions detected, {golden}/{} golden fixtures match",
            fixtures.len()
        ),
    )
}

fn landing() -> Verdict {
    let cfg = ScenarioConfig::preset(ScenarioKind::MovingPlatformLanding);
    let start = Instant::now();
    let l = match landing_scenario(&cfg) {
        Ok(l) => l,
        Err(e) => return verdict(false, format!("landing failed: {e}")),
    };
    let wall = start.elapsed();
    let expected = cfg.drones.len() + 1;
    let drop = l.count_changes.iter().position(|c| (c.1, c.2) == (expected, expected - 1));
    let recovered = drop.is_some_and(|k| l.count_changes[k + 1..].iter().any(|c| (c.1, c.2) == (expected - 1, expected)));
    let occluded = cfg.landing.occlusions[0];
    let during_hover = drop.is_some_and(|k| {
        let t = l.count_changes[k].0;
        t >= occluded[0] && l.descent_start.is_none_or(|d| t < d)
    });
    let pass = l.touchdown_offset <= 0.5
        && l.hover_errors.iter().all(|e| *e < 0.5)
        && recovered
        && during_hover
        && l.track_error_max < 1.0
        && wall < WALL_LIMIT;
    let changes: Vec<String> = l.count_changes.iter().map(|c| format!("{}->{} at {:.2} s", c.1, c.2, c.0)).collect();
    verdict(
        pass,
        format!(
            "touchdown offset {:.3} units at {:.1} s, hover errors {:.2} {:.2} {:.2}, count {}, platform track within {:.2} units",
            l.touchdown_offset,
            l.touchdown_time,
            l.hover_errors[0],
            l.hover_errors[1],
            l.hover_errors[2],
            changes.join(", "),
            l.track_error_max
        ),
    )
}

/// Distance from `p` to the hoop's ring and to the wall around it.
fn hoop_clearance(h: &Hoop, p: &Vec3) -> f64 {
    let d = p - h.center;
    let axial = d.dot(&h.axis);
    let radial = (d - h.axis * axial).norm();
    let ring = h.inner_radius + h.tube_radius;
    let tube = ((radial - ring).powi(2) + axial.powi(2)).sqrt() - h.tube_radius;
    let outside = (ring - radial).max(0.0);
    let off_plane = (axial.abs() - h.tube_radius).max(0.0);
    tube.min((outside.powi(2) + off_plane.powi(2)).sqrt())
}

fn densely_free(scene: &Scene3D, points: &[Vec3], radius: f64) -> bool {
    points.windows(2).all(|w| {
        let n = ((w[1] - w[0]).norm() / 0.05).ceil().max(1.0) as usize;
        (0..=n).all(|k| {
            let p = w[0] + (w[1] - w[0]) * (k as f64 / n as f64);
            let inside = (0..3).all(|i| p[i] >= scene.bounds.min[i] && p[i] <= scene.bounds.max[i]);
            inside && scene.hoops.iter().all(|h| hoop_clearance(h, &p) > radius)
        })
    })
}

fn crosses_opening(h: &Hoop, a: &Vec3, b: &Vec3) -> bool {
    let (ha, hb) = ((a - h.center).dot(&h.axis), (b - h.center).dot(&h.axis));
    if ha * hb > 0.0 || ha == hb {
        return false;
    }
    let q = a + (b - a) * (ha / (ha - hb));
    let d = q - h.center;
    (d - h.axis * d.dot(&h.axis)).norm() < h.inner_radius
}

fn hoops() -> Verdict {
    let (out, wall) = timed(ScenarioKind::HoopTraversal);
    let h = &out.config.hoops;
    let plans = out.plans.len();
    let enough = out.plans.iter().filter(|l| l.plan.waypoints.len() >= MIN_WAYPOINTS).count();
    let free = out
        .plans
        .iter()
        .filter(|l| densely_free(&h.scene, &l.plan.points(), h.rrt.drone_radius))
        .count();
    let in_budget = out
        .plans
        .iter()
        .filter(|l| l.plan.iterations <= h.rrt.max_iterations && l.plan.planning_time <= h.rrt.max_time)
        .count();
    let truth: Vec<Vec3> = out.log.drone(0).map(|r| r.truth).collect();
    let passed = h
        .order
        .iter()
        .filter(|&&i| truth.windows(2).any(|w| crosses_opening(&h.scene.hoops[i], &w[0], &w[1])))
        .count();
    let min_wp = out.plans.iter().map(|l| l.plan.waypoints.len()).min().unwrap_or(0);
    let pass = plans == 9 && enough == 9 && free == 9 && in_budget == 9 && passed == h.order.len() && wall < WALL_LIMIT;
    verdict(
        pass,
        format!(
            "{plans} plans, {enough} with >= {MIN_WAYPOINTS} waypoints (fewest {min_wp}), {free} collision-free, {in_budget} within budget, flew through {passed}/{} hoops, wall time {:.2} s",
            h.order.len(),
            wall.as_secs_f64()
        ),
    )
}

fn formations() -> Verdict {
    let (rot, wall_rot) = timed(ScenarioKind::FormationRotation);
    let f = &rot.config.formation;
    let settled = rot
        .log
        .rows
        .iter()
        .find(|r| r.events.contains("step 1"))
        .map_or(f64::INFINITY, |r| r.t);
    let n = rot.config.drones.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for r0 in rot.log.drone(0).filter(|r| r.t >= settled) {
        let angles: Vec<f64> = (0..n)
            .filter_map(|i| rot.log.drone(i).find(|r| r.t == r0.t).map(|r| formation_angle(&r.truth, &f.center)))
            .collect();
        for i in 0..n {
            let sep = (angles[(i + 1) % n] - angles[i]).rem_euclid(360.0);
            lo = lo.min(sep);
            hi = hi.max(sep);
        }
    }
    let rotation_ok = rot.success && lo >= 110.0 && hi <= 130.0;

    let (circle, wall_circle) = timed(ScenarioKind::FormationCircle);
    let completed = circle.metrics.details["setpoints_completed"].as_u64().unwrap_or(0);
    let radial = circle.metrics.details["max_radial_error"].as_f64().unwrap_or(f64::INFINITY);
    let circle_ok = circle.success && completed == 36 && radial <= 2.0;

    let (square, wall_square) = timed(ScenarioKind::FormationSquare);
    let f = &square.config.formation;
    let h = f.side / 2.0;
    let corners = [[h, h], [-h, h], [-h, -h], [h, -h]];
    let mut visited = 0;
    for drone in 0..2 {
        for c in corners {
            let hit = square.log.drone(drone).any(|r| {
                ((r.truth.x - f.center[0] - c[0]).powi(2) + (r.truth.y - f.center[1] - c[1]).powi(2) + (r.truth.z - f.center[2]).powi(2))
                    .sqrt()
                    < f.tolerance
            });
            visited += hit as usize;
        }
    }
    let center = Vec3::from(f.center);
    let drift = square.log.drone(2).map(|r| (r.truth - center).norm()).fold(0.0f64, f64::max);
    let square_ok = square.success && visited == 8 && drift <= 1.0;
    let walls = [wall_rot, wall_circle, wall_square];
    let pass = rotation_ok && circle_ok && square_ok && walls.iter().all(|w| *w < WALL_LIMIT);
    verdict(
        pass,
        format!(
            "rotation separation {lo:.1} to {hi:.1} deg, circle {completed}/36 setpoints with radial error <= {radial:.2}, square corners {visited}/8, center drone within {drift:.2}"
        ),
    )
}

fn determinism() -> Verdict {
    let mut same = 0;
    let mut slowest = Duration::ZERO;
    for kind in ScenarioKind::ALL {
        let cfg = ScenarioConfig::preset(kind);
        let start = Instant::now();
        let a = harness::run(&cfg).expect("first run");
        slowest = slowest.max(start.elapsed());
        let b = harness::run(&cfg).expect("second run");
        let extras_match = a.extra_logs.len() == b.extra_logs.len()
            && a.extra_logs.iter().zip(&b.extra_logs).all(|(x, y)| x.1.to_csv() == y.1.to_csv());
        if a.log.to_csv() == b.log.to_csv() && extras_match {
            same += 1;
        }
    }
    let total = ScenarioKind::ALL.len();
    verdict(
        same == total && slowest < WALL_LIMIT,
        format!("{same}/{total} scenarios byte-identical on rerun, slowest run {:.2} s", slowest.as_secs_f64()),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("position hold envelope", position_hold),
        ("internal-only divergence", internal_drift),
        ("localization accuracy", localization),
        ("Ziegler-Nichols table and relay", zn_table),
        ("overshoot ordering", overshoot_ordering),
        ("iterative autotune", autotune),
        ("latency budget", latency),
        ("MSP codec", msp),
        ("moving-platform landing", landing),
        ("hoop traversal", hoops),
        ("formations", formations),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!("criterion {:2} {name}: {} ({})", k + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

