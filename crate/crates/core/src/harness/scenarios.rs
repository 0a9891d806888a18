use std::path::Path;

use serde_json::json;

use super::config::{ScenarioConfig, ScenarioKind};
use super::log::RunLog;
use super::metrics::{summarize, AxisSummary, Metrics, METRICS_SCHEMA_VERSION};
use super::missions::{FormationMission, HoldMission, LandingMission, RelayMission, WaypointMission};
use super::sim::{simulate, stream_seed, to_whycon, to_world, Feedback, Mission, PlatformSetup, SimOutput, SimSetup};
use super::HarnessError;
use crate::control::{
    iterative_autotune, AutotuneConfig, AutotuneReport, AxisGains, ControlError, ControllerType, RelayConfig,
    RelayTuneResult, RelayTuner, Setpoint, TrialResponse, TuningPlant, WaypointNavigator,
};
use crate::geometry::{Vec3, WhyConPose};
use crate::msp::ChannelModel;
use crate::planning::{
    formation_waypoint, hoop_traversal_plan, square_formation, to_point, FormationParams, HoopLeg,
    HoopTraversalConfig, FORMATION_STEPS,
};
use crate::vehicle::PlatformState;

/// Result of one scenario run.
#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub config: ScenarioConfig,
    pub log: RunLog,
    pub metrics: Metrics,
    pub success: bool,
    /// Further logs, such as the verification flight after relay tuning.
    pub extra_logs: Vec<(String, RunLog)>,
    pub plans: Vec<HoopLeg>,
    pub sim: Option<SimOutput>,
}

impl ScenarioOutcome {
    /// Write `log.csv`, `metrics.json`, `config.toml` and any extra artifacts into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        self.log.save(&dir.join("log.csv"))?;
        for (name, log) in &self.extra_logs {
            log.save(&dir.join(format!("{name}.csv")))?;
        }
        std::fs::write(dir.join("metrics.json"), self.metrics.to_json())?;
        std::fs::write(dir.join("config.toml"), self.config.to_toml())?;
        if !self.plans.is_empty() {
            let plans: Vec<_> = self
                .plans
                .iter()
                .map(|l| json!({ "hoop": l.hoop, "leg": l.leg, "cost": l.plan.cost, "waypoints": l.plan.waypoints }))
                .collect();
            std::fs::write(dir.join("plans.json"), serde_json::to_string_pretty(&plans).expect("plans serialize"))?;
        }
        Ok(())
    }
}

/// Build the simulator setup shared by every scenario.
pub fn sim_setup(cfg: &ScenarioConfig) -> Result<SimSetup, HarnessError> {
    let channel = ChannelModel::new(cfg.latency.channel_jitter_ms, cfg.latency.drop_probability, stream_seed(cfg.seed, 3))
        .map_err(|e| HarnessError::config("latency", e.to_string()))?;
    let mut channel = channel;
    channel.per_hop_delay = cfg.latency.per_hop_ms;
    Ok(SimSetup {
        camera: cfg.camera.model(),
        marker: cfg.marker,
        timing: cfg.loop_timing()?,
        budget: cfg.latency.budget,
        pid_jitter_ms: cfg.latency.pid_jitter_ms,
        channel,
        perception: cfg.perception,
        vehicle: cfg.vehicle,
        drift: cfg
            .drift
            .enabled
            .then_some((cfg.drift.velocity_walk_std, cfg.drift.altitude_bias_rate)),
        disturbance: cfg.disturbance,
        gains: cfg.gains.axis_gains(),
        throttle_trim: cfg.gains.throttle_trim,
        starts: cfg.drones.iter().map(|d| Vec3::from(d.start)).collect(),
        platform: None,
        feedback: Feedback::Camera,
        seed: cfg.seed,
        duration: cfg.duration,
    })
}

fn sp(v: [f64; 3]) -> Setpoint {
    Setpoint::new(v[0], v[1], v[2])
}

fn metrics(cfg: &ScenarioConfig, log: &RunLog, success: bool, landing: Option<f64>, details: serde_json::Value) -> Metrics {
    Metrics {
        schema_version: METRICS_SCHEMA_VERSION,
        scenario: cfg.scenario.name().to_string(),
        seed: cfg.seed,
        duration: cfg.duration,
        camera_fps: cfg.camera.fps,
        sample_time: cfg.loop_timing().map_or(f64::NAN, |t| t.sample_time),
        success,
        summary: summarize(log).ok(),
        landing_offset: landing,
        details,
    }
}

fn outcome(cfg: &ScenarioConfig, sim: SimOutput, success: bool, landing: Option<f64>, details: serde_json::Value) -> ScenarioOutcome {
    let metrics = metrics(cfg, &sim.log, success, landing, details);
    ScenarioOutcome {
        config: cfg.clone(),
        log: sim.log.clone(),
        metrics,
        success,
        extra_logs: Vec::new(),
        plans: Vec::new(),
        sim: Some(sim),
    }
}

/// Run whichever scenario the config names.
pub fn run(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    cfg.validate()?;
    match cfg.scenario {
        ScenarioKind::PositionHold => position_hold(cfg),
        ScenarioKind::InternalOnlyDrift => internal_only_drift(cfg),
        ScenarioKind::WaypointNav => waypoint_nav(cfg),
        ScenarioKind::ZnAutotune => zn_autotune(cfg),
        ScenarioKind::IterativeAutotune => iterative_autotune_scenario(cfg),
        ScenarioKind::MovingPlatformLanding => landing_scenario(cfg).map(|l| l.outcome),
        ScenarioKind::HoopTraversal => hoop_traversal(cfg),
        ScenarioKind::FormationCircle | ScenarioKind::FormationRotation => formation_circle(cfg),
        ScenarioKind::FormationSquare => formation_square(cfg),
    }
}

fn hold_setpoints(cfg: &ScenarioConfig) -> Vec<Setpoint> {
    cfg.drones
        .iter()
        .enumerate()
        .map(|(i, d)| match (i, cfg.hold.setpoint) {
            (0, Some(s)) => sp(s),
            _ => sp(d.start),
        })
        .collect()
}

/// Per-axis errors of drone 0 in the x, y, z order.
pub fn error_traces(log: &RunLog, drone: usize) -> [Vec<f64>; 3] {
    let rows: Vec<[f64; 3]> = log.drone(drone).filter_map(|r| r.error).collect();
    [0, 1, 2].map(|k| rows.iter().map(|e| e[k]).collect())
}

pub fn position_hold(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let mut mission = HoldMission {
        setpoints: hold_setpoints(cfg),
    };
    let sim = simulate(sim_setup(cfg)?, &mut mission);
    let env = cfg.hold.envelope;
    let rows: Vec<[f64; 3]> = sim
        .log
        .drone(0)
        .filter(|r| r.t >= cfg.hold.settle)
        .filter_map(|r| r.error)
        .collect();
    let traces = [0, 1, 2].map(|k| rows.iter().map(|e| e[k]).collect::<Vec<f64>>());
    let mut success = true;
    let mut axes = Vec::new();
    for (k, name) in ["x", "y", "z"].iter().enumerate() {
        let [lo, hi] = env.band(k);
        let within = AxisSummary::within(&traces[k], lo, hi);
        let hard = AxisSummary::within(&traces[k], env.hard_factor * lo, env.hard_factor * hi);
        success &= within >= env.fraction && hard == 1.0;
        axes.push(json!({ "axis": name, "band": [lo, hi], "within": within, "within_hard": hard }));
    }
    success &= !sim.log.is_empty() || cfg.duration == 0.0;
    Ok(outcome(cfg, sim, success, None, json!({ "envelope": axes })))
}

pub fn internal_only_drift(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let mut mission = HoldMission {
        setpoints: hold_setpoints(cfg),
    };
    let mut setup = sim_setup(cfg)?;
    setup.feedback = Feedback::Internal;
    let sim = simulate(setup, &mut mission);
    let summary = summarize(&sim.log).ok();
    let exit = summary.as_ref().and_then(|s| s.out_of_frame_time);
    let pre_exit_max = sim
        .log
        .drone(0)
        .take_while(|r| exit.is_none_or(|t| r.t < t))
        .filter_map(|r| r.truth_error())
        .fold([0.0f64; 3], |m, e| [0, 1, 2].map(|k| m[k].max(e[k].abs())));
    let peak = pre_exit_max.iter().cloned().fold(0.0, f64::max);
    let success = exit.is_some() && peak >= cfg.hold.divergence;
    let details = json!({ "exit_time": exit, "pre_exit_max_error": pre_exit_max });
    Ok(outcome(cfg, sim, success, None, details))
}

pub fn waypoint_nav(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let points: Vec<Setpoint> = cfg.waypoints.points.iter().map(|p| sp(*p)).collect();
    let nav = WaypointNavigator::new(points, cfg.waypoints.tolerance, cfg.waypoints.dwell)
        .map_err(|e| HarnessError::config("waypoints.points", e.to_string()))?;
    let mut mission = WaypointMission::new(nav);
    let sim = simulate(sim_setup(cfg)?, &mut mission);
    let success = mission.nav.is_finished();
    let details = json!({ "reached": mission.reached, "waypoints": mission.nav.len() });
    Ok(outcome(cfg, sim, success, None, details))
}

fn relay_experiment(cfg: &ScenarioConfig) -> Result<(SimOutput, Result<RelayTuneResult, ControlError>), HarnessError> {
    let start = hold_setpoints(cfg)[0];
    let settle = 5.0;
    let relay = RelayConfig {
        setpoint: -start.x,
        amplitude: cfg.relay.amplitude,
        bias: 0.0,
        cycles: cfg.relay.cycles,
        discard: cfg.relay.discard,
        dt: 0.0,
        timeout: cfg.relay.timeout,
        hysteresis: cfg.relay.hysteresis,
    };
    let mut mission = RelayMission {
        setpoint: start,
        tuner: RelayTuner::new(relay),
        settle,
    };
    let mut setup = sim_setup(cfg)?;
    setup.duration = cfg.duration.min(settle + cfg.relay.timeout);
    let sim = simulate(setup, &mut mission);
    Ok((sim, mission.tuner.result()))
}

pub fn zn_autotune(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let controller: ControllerType = cfg
        .relay
        .controller
        .parse()
        .map_err(|e: ControlError| HarnessError::config("relay.controller", e.to_string()))?;
    let (relay_sim, result) = relay_experiment(cfg)?;
    let result = match result {
        Ok(r) => r,
        Err(e) => {
            return Err(HarnessError::ScenarioAborted {
                reason: e.to_string(),
                log: Box::new(relay_sim.log),
            })
        }
    };
    let gains = crate::control::zn_gains(&result, controller);
    let mut check = cfg.clone();
    check.gains.roll = gains;
    check.gains.pitch = gains;
    check.duration = cfg.relay.step_duration;
    let start = hold_setpoints(cfg)[0];
    let target = Setpoint::new(start.x + cfg.relay.step, start.y, start.z);
    let mut mission = StepMission {
        before: start,
        after: target,
        at: 2.0,
    };
    let step_sim = simulate(sim_setup(&check)?, &mut mission);
    let step_summary = summarize(&step_sim.log).ok();
    let x_step = step_summary.as_ref().and_then(|s| s.steps.iter().find(|s| s.axis == 0).copied());
    let tail = tail_error(&step_sim.log, 0, 0.25);
    let success = tail[0] < 1.0 && tail.iter().all(|e| e.is_finite());
    let details = json!({
        "ku": result.ku, "tu": result.tu, "relay_amplitude": result.d, "oscillation_amplitude": result.a,
        "controller": controller.name(), "gains": gains, "step": x_step, "tail_error": tail,
    });
    let mut out = outcome(cfg, relay_sim, success, None, details);
    out.extra_logs.push(("step".into(), step_sim.log));
    Ok(out)
}

/// Mean absolute truth error per axis over the final `fraction` of the log.
pub fn tail_error(log: &RunLog, drone: usize, fraction: f64) -> [f64; 3] {
    let rows: Vec<[f64; 3]> = log.drone(drone).filter_map(|r| r.truth_error()).collect();
    if rows.is_empty() {
        return [f64::NAN; 3];
    }
    let n = ((rows.len() as f64 * fraction).ceil() as usize).clamp(1, rows.len());
    let tail = &rows[rows.len() - n..];
    [0, 1, 2].map(|k| tail.iter().map(|e| e[k].abs()).sum::<f64>() / n as f64)
}

/// Hold one setpoint, then switch to another at a fixed time.
pub struct StepMission {
    pub before: Setpoint,
    pub after: Setpoint,
    pub at: f64,
}

impl Mission for StepMission {
    fn tick(&mut self, input: &super::sim::TickInput, _: &mut [Vec<String>]) -> Vec<super::sim::Directive> {
        let s = if input.t < self.at { self.before } else { self.after };
        vec![super::sim::Directive::hold(s)]
    }
}

/// Trailing mean over up to `window` samples.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut sum = 0.0;
    let mut out = Vec::with_capacity(values.len());
    for (k, v) in values.iter().enumerate() {
        sum += v;
        if k >= w {
            sum -= values[k - w];
        }
        out.push(sum / (k + 1).min(w) as f64);
    }
    out
}

/// Each trial is a closed-loop flight from rest with a setpoint offset on
/// every axis. Errors are smoothed over `window` control ticks before the
/// tuner sees them.
pub struct SimTuningPlant {
    pub config: ScenarioConfig,
    pub window: usize,
    pub trials: usize,
}

impl TuningPlant for SimTuningPlant {
    fn trial(&mut self, gains: &AxisGains) -> TrialResponse {
        self.trials += 1;
        let mut cfg = self.config.clone();
        cfg.gains.roll = gains.roll;
        cfg.gains.pitch = gains.pitch;
        cfg.gains.throttle = gains.throttle;
        cfg.duration = cfg.autotune.trial_duration;
        let start = hold_setpoints(&cfg)[0];
        let d = cfg.autotune.step;
        let mut mission = StepMission {
            before: start,
            after: Setpoint::new(start.x + d, start.y + d, start.z + d),
            at: 0.0,
        };
        let setup = match sim_setup(&cfg) {
            Ok(s) => s,
            Err(_) => return TrialResponse { dt: 0.0, errors: [vec![f64::NAN], vec![f64::NAN], vec![f64::NAN]] },
        };
        let sim = simulate(setup, &mut mission);
        let [x, y, z] = error_traces(&sim.log, 0).map(|e| moving_average(&e, self.window));
        let dt = cfg.loop_timing().map_or(0.1, |t| t.sample_time);
        // the tuner's axes are roll (y), pitch (x), throttle (z)
        TrialResponse { dt, errors: [y, x, z] }
    }
}

pub fn autotune_config(cfg: &ScenarioConfig) -> AutotuneConfig {
    let a = &cfg.autotune;
    let mut c = AutotuneConfig::new([a.roll, a.pitch, a.throttle]);
    c.threshold = a.threshold;
    c.threshold_prime = a.threshold_prime;
    c.kp_step = a.kp_step;
    c.ki_step = a.ki_step;
    c.kd_step = a.kd_step;
    c.max_iterations = a.max_iterations;
    c
}

pub fn iterative_autotune_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let mut plant = SimTuningPlant {
        config: cfg.clone(),
        window: cfg.autotune.smoothing,
        trials: 0,
    };
    let tuning = autotune_config(cfg);
    let report: AutotuneReport = match iterative_autotune(&mut plant, &tuning) {
        Ok(r) => r,
        Err(e) => {
            return Err(HarnessError::ScenarioAborted {
                reason: e.to_string(),
                log: Box::new(RunLog::default()),
            })
        }
    };
    // replay the final trial for the log
    let mut final_cfg = cfg.clone();
    final_cfg.gains.roll = report.gains.roll;
    final_cfg.gains.pitch = report.gains.pitch;
    final_cfg.gains.throttle = report.gains.throttle;
    final_cfg.duration = cfg.autotune.trial_duration;
    let start = hold_setpoints(cfg)[0];
    let d = cfg.autotune.step;
    let mut mission = StepMission {
        before: start,
        after: Setpoint::new(start.x + d, start.y + d, start.z + d),
        at: 0.0,
    };
    let sim = simulate(sim_setup(&final_cfg)?, &mut mission);
    let errors = report.final_errors();
    let success = errors.iter().all(|e| *e < tuning.threshold_prime);
    let details = json!({
        "gains": report.gains, "final_errors": errors, "trials": plant.trials,
        "loop1_iterations": report.loop1_iterations, "loop2_iterations": report.loop2_iterations,
        "history": report.history,
    });
    let mut out = outcome(cfg, sim, success, None, details);
    out.metrics.duration = final_cfg.duration;
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct LandingOutcome {
    pub success: bool,
    /// Horizontal drone-to-platform offset at contact, WhyCon units.
    pub touchdown_offset: f64,
    pub touchdown_time: f64,
    pub descent_start: Option<f64>,
    /// Mean absolute error per axis over the last second before contact.
    pub final_errors: [f64; 3],
    /// Mean absolute error per axis over the hover window that ends when descent starts.
    pub hover_errors: [f64; 3],
    /// Largest horizontal gap between the setpoint and the true platform
    /// from the first occlusion to contact, WhyCon units.
    pub track_error_max: f64,
    /// Target-count transitions as `(time, from, to)`.
    pub count_changes: Vec<(f64, usize, usize)>,
    /// The count dropped during an occlusion and came back afterwards.
    pub count_recovered: bool,
    pub outcome: ScenarioOutcome,
}

/// Seconds of hover before descent over which the errors must have converged.
const HOVER_WINDOW: f64 = 2.0;
/// Setpoint-to-platform gap beyond which the platform track counts as lost.
const TRACK_TOLERANCE: f64 = 1.0;
const CONVERGED: f64 = 0.5;

fn mean_abs(rows: &[[f64; 3]]) -> [f64; 3] {
    if rows.is_empty() {
        return [f64::NAN; 3];
    }
    [0, 1, 2].map(|k| rows.iter().map(|e| e[k].abs()).sum::<f64>() / rows.len() as f64)
}

pub fn landing_scenario(cfg: &ScenarioConfig) -> Result<LandingOutcome, HarnessError> {
    let l = &cfg.landing;
    let cam = cfg.camera.model();
    let center = to_world(&cam, &Vec3::new(l.center[0], l.center[1], 10.0 * cfg.camera.mount_height));
    let radius_m = l.radius / 10.0;
    let state = if l.radius > 0.0 {
        PlatformState::circle(Vec3::new(center.x, center.y, l.platform_height), radius_m, 72, l.speed)
    } else {
        PlatformState::new(
            vec![Vec3::new(center.x, center.y, 0.0), Vec3::new(center.x + 1e-3, center.y, 0.0)],
            0.0,
            l.platform_height,
        )
    }
    .map_err(|e| HarnessError::config("landing", e.to_string()))?;
    let mut setup = sim_setup(cfg)?;
    let platform_pose = to_whycon(&cam, &state.position);
    setup.platform = Some(PlatformSetup {
        state,
        occlusions: l.occlusions.iter().map(|w| (w[0], w[1])).collect(),
        contact_gap: l.contact_gap,
        radius: l.pad_radius,
    });
    let mut mission = LandingMission::new(
        l.hover_height,
        l.descend_threshold,
        l.hover_time,
        l.descent_rate,
        WhyConPose::from_position(&platform_pose).with_id(cfg.drones.len() as u32),
    );
    mission.lead = l.lead;
    let sim = simulate(setup, &mut mission);
    let changes: Vec<(f64, usize, usize)> = sim
        .count_changes
        .iter()
        .map(|(t, c)| match c {
            crate::marker::CountChange::Decreased { from, to, .. } | crate::marker::CountChange::Increased { from, to, .. } => {
                (*t, *from, *to)
            }
        })
        .collect();
    let Some(td) = sim.touchdown else {
        return Err(HarnessError::LandingTimeout {
            duration: cfg.duration,
            log: Box::new(sim.log),
        });
    };
    let window = |from: f64, to: f64| -> Vec<[f64; 3]> {
        sim.log.drone(0).filter(|r| r.t <= to && r.t > from).filter_map(|r| r.error).collect()
    };
    let final_errors = mean_abs(&window(td.time - 1.0, td.time));
    let hover_errors = match mission.descent_start {
        Some(t) => mean_abs(&window(t - HOVER_WINDOW, t)),
        None => [f64::NAN; 3],
    };
    let watch_from = l.occlusions.iter().map(|w| w[0]).fold(f64::INFINITY, f64::min).min(td.time);
    let track_error_max = sim
        .log
        .drone(0)
        .zip(&sim.platform_trace)
        .filter(|(r, (t, _))| *t >= watch_from && *t <= td.time && r.t == *t)
        .filter_map(|(r, (_, p))| r.setpoint.map(|s| ((s.x - p.x).powi(2) + (s.y - p.y).powi(2)).sqrt()))
        .fold(0.0f64, f64::max);
    let expected = cfg.drones.len() + 1;
    let drop = changes.iter().position(|c| c.1 == expected && c.2 == expected - 1);
    let count_recovered = match drop {
        Some(k) => changes[k + 1..].iter().any(|c| c.1 == expected - 1 && c.2 == expected),
        None => false,
    };
    let success = td.offset <= 0.5
        && hover_errors.iter().all(|e| *e < CONVERGED)
        && [final_errors[0], final_errors[1]].iter().all(|e| *e < CONVERGED)
        && track_error_max < TRACK_TOLERANCE
        && (l.occlusions.is_empty() || count_recovered);
    let details = json!({
        "touchdown": td, "descent_start": mission.descent_start, "final_errors": final_errors,
        "hover_errors": hover_errors, "track_error_max": track_error_max,
        "count_changes": changes, "count_recovered": count_recovered,
    });
    let out = outcome(cfg, sim, success, Some(td.offset), details);
    Ok(LandingOutcome {
        success,
        touchdown_offset: td.offset,
        touchdown_time: td.time,
        descent_start: mission.descent_start,
        final_errors,
        hover_errors,
        track_error_max,
        count_changes: changes,
        count_recovered,
        outcome: out,
    })
}

/// Plan every hoop leg, then fly the concatenated waypoints.
pub fn hoop_traversal(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let h = &cfg.hoops;
    let mut rrt = h.rrt;
    rrt.seed = stream_seed(cfg.seed, 10);
    let tcfg = HoopTraversalConfig {
        standoff: h.standoff,
        rrt,
    };
    let start = Vec3::from(cfg.drones[0].start);
    let legs = hoop_traversal_plan(&h.scene, &h.order, start, h.end.map(Vec3::from), &tcfg)?;
    let mut points: Vec<Setpoint> = Vec::new();
    for leg in &legs {
        points.extend(leg.plan.waypoints.iter().copied());
    }
    if points.is_empty() {
        points.push(sp(cfg.drones[0].start));
    }
    let nav = WaypointNavigator::new(points, h.tolerance, 0.0).map_err(|e| HarnessError::config("hoops", e.to_string()))?;
    let mut mission = WaypointMission::new(nav);
    let sim = simulate(sim_setup(cfg)?, &mut mission);
    let truth: Vec<Vec3> = sim.log.drone(0).map(|r| r.truth).collect();
    let passed: Vec<bool> = h
        .order
        .iter()
        .map(|&i| {
            let hoop = &h.scene.hoops[i];
            truth.windows(2).any(|w| hoop.passes_through(&w[0], &w[1]))
        })
        .collect();
    let min_clearance = truth
        .iter()
        .map(|p| h.scene.clearance(p))
        .fold(f64::INFINITY, f64::min);
    let plans_ok = legs.len() == 3 * h.order.len()
        && legs.iter().all(|l| {
            l.plan.waypoints.len() >= crate::planning::MIN_WAYPOINTS
                && h.scene
                    .first_collision(&l.plan.points(), h.rrt.drone_radius, crate::planning::VALIDATION_STEP)
                    .is_none()
        });
    let success = plans_ok && mission.nav.is_finished() && passed.iter().all(|p| *p);
    let details = json!({
        "plans": legs.len(),
        "waypoints_per_plan": legs.iter().map(|l| l.plan.waypoints.len()).collect::<Vec<_>>(),
        "plan_costs": legs.iter().map(|l| l.plan.cost).collect::<Vec<_>>(),
        "passed": passed, "min_clearance": min_clearance, "finished": mission.nav.is_finished(),
    });
    let mut out = outcome(cfg, sim, success, None, details);
    out.plans = legs;
    Ok(out)
}

/// Angle of a WhyCon point about `center` as used by the formation formula, degrees in `[0, 360)`.
pub fn formation_angle(p: &Vec3, center: &[f64; 3]) -> f64 {
    (p.x - center[0]).atan2(p.y - center[1]).to_degrees().rem_euclid(360.0)
}

pub fn formation_circle(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let f = &cfg.formation;
    let base = FormationParams {
        r: f.radius,
        dist_apart: f.dist_apart,
        wc_id: 0,
        a: 0,
        center_x: f.center[0],
        center_y: f.center[1],
        z: f.center[2],
    };
    let targets: Vec<Vec<Setpoint>> = (0..cfg.drones.len() as u32)
        .map(|id| {
            (0..=FORMATION_STEPS)
                .map(|a| formation_waypoint(&FormationParams { a, wc_id: id, ..base }))
                .collect()
        })
        .collect();
    let mut mission = FormationMission::new(targets, f.tolerance, f.dwell);
    let sim = simulate(sim_setup(cfg)?, &mut mission);
    let completed = mission.completed.iter().filter(|(k, _)| *k >= 1).count();
    let settle_after = mission.completed.iter().find(|(k, _)| *k == 1).map_or(f64::INFINITY, |c| c.1);
    let n = cfg.drones.len();
    let mut radial = 0.0f64;
    for r in sim.log.rows.iter().filter(|r| r.t >= settle_after) {
        let d = ((r.truth.x - f.center[0]).powi(2) + (r.truth.y - f.center[1]).powi(2)).sqrt();
        radial = radial.max((d - f.radius).abs());
    }
    let mut separation = (f64::INFINITY, f64::NEG_INFINITY);
    if n > 1 {
        let ticks: Vec<f64> = sim.log.drone(0).map(|r| r.t).filter(|t| *t >= settle_after).collect();
        for t in ticks {
            let angles: Vec<f64> = (0..n)
                .filter_map(|i| sim.log.drone(i).find(|r| r.t == t).map(|r| formation_angle(&r.truth, &f.center)))
                .collect();
            if angles.len() != n {
                continue;
            }
            for i in 0..n {
                let j = (i + 1) % n;
                let sep = (angles[j] - angles[i]).rem_euclid(360.0);
                separation = (separation.0.min(sep), separation.1.max(sep));
            }
        }
    }
    let expected = f.dist_apart.rem_euclid(360.0);
    let sep_ok = n == 1 || (separation.0 >= expected - 10.0 && separation.1 <= expected + 10.0);
    let success = mission.finished() && completed == FORMATION_STEPS as usize && sep_ok;
    let details = json!({
        "setpoints_completed": completed, "max_radial_error": radial,
        "separation_min": separation.0.is_finite().then_some(separation.0),
        "separation_max": separation.1.is_finite().then_some(separation.1),
    });
    Ok(outcome(cfg, sim, success, None, details))
}

pub fn formation_square(cfg: &ScenarioConfig) -> Result<ScenarioOutcome, HarnessError> {
    let f = &cfg.formation;
    let center = Setpoint::new(f.center[0], f.center[1], f.center[2]);
    let walks = square_formation(f.side, center, cfg.drones.len())?;
    let targets: Vec<Vec<Setpoint>> = walks
        .iter()
        .map(|w| {
            let mut seq: Vec<Setpoint> = (0..f.cycles.max(1)).flat_map(|_| w.iter().copied()).collect();
            seq.push(w[0]);
            seq
        })
        .collect();
    let mut mission = FormationMission::new(targets, f.tolerance, f.dwell);
    let sim = simulate(sim_setup(cfg)?, &mut mission);
    let mut visited = Vec::new();
    for (i, walk) in walks.iter().enumerate().take(2) {
        let seen: Vec<bool> = walk
            .iter()
            .map(|v| sim.log.drone(i).any(|r| (r.truth - to_point(v)).norm() < f.tolerance))
            .collect();
        visited.push(seen);
    }
    let center_dev = sim
        .log
        .drone(2)
        .map(|r| (r.truth - to_point(&center)).norm())
        .fold(0.0f64, f64::max);
    let success = mission.finished() && visited.iter().flatten().all(|v| *v) && center_dev <= 1.0;
    let details = json!({ "visited": visited, "center_max_deviation": center_dev, "steps": mission.completed.len() });
    Ok(outcome(cfg, sim, success, None, details))
}
