use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::log::{LogRow, RunLog};
use crate::control::{AxisGains, ControlError, LoopTiming, PositionController, Setpoint};
use crate::geometry::{CameraModel, UnitScale, Vec3, WhyConPose};
use crate::marker::{disambiguate_by_z, localize, CountChange, Detector, MarkerPlacement, MarkerSpec, Renderer, Track, TrackerState};
use crate::msp::{command_frame, decode, decode_command, ChannelModel, Delivery, LatencyBudget};
use crate::vehicle::{step_drone, CommandMessage, DriftModel, DroneState, PlatformState, VehicleParams, MAX_STEP};

/// Depth gap in WhyCon units beyond which the nearer marker is taken to be the drone.
const DEPTH_MARGIN: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerceptionMode {
    /// Project the true marker position and add Gaussian noise.
    Direct,
    /// Render a camera frame, then detect and localize the rings in it.
    Rendered,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PerceptionConfig {
    pub mode: PerceptionMode,
    /// Standard deviation of the pose noise in x and y, WhyCon units.
    pub noise_xy: f64,
    pub noise_z: f64,
    /// Pixel intensity noise in rendered mode, gray levels.
    pub render_noise: f64,
    pub miss_window: u32,
    /// A marker closer than this to the image border is not seen, pixels.
    pub margin_px: f64,
}

impl Default for PerceptionConfig {
    fn default() -> Self {
        Self {
            mode: PerceptionMode::Direct,
            noise_xy: 0.15,
            noise_z: 0.4,
            render_noise: 2.0,
            miss_window: 5,
            margin_px: 8.0,
        }
    }
}

/// Random wander applied to the true vehicle state.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct Disturbance {
    /// Horizontal velocity kicks, m/s per √s.
    pub velocity_std: f64,
    /// Vertical position kicks, m per √s.
    pub vertical_std: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feedback {
    /// Poses from the overhead camera.
    Camera,
    /// The drone's own integrated estimate.
    Internal,
}

/// What the mission asks of one drone on a control tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Directive {
    /// Run the position controller; a `Some` override replaces that axis's PID output.
    Track { setpoint: Setpoint, overrides: [Option<f64>; 3] },
    Send(CommandMessage),
    Idle,
}

impl Directive {
    pub fn hold(setpoint: Setpoint) -> Self {
        Directive::Track {
            setpoint,
            overrides: [None; 3],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Touchdown {
    pub time: f64,
    pub drone: usize,
    /// Horizontal distance between drone and platform markers, WhyCon units.
    pub offset: f64,
}

pub struct TickInput<'a> {
    pub t: f64,
    /// Pose the controller will use for each drone, if any.
    pub feedback: &'a [Option<WhyConPose>],
    /// Poses published by the latest perception batch, tagged with track ids.
    pub published: &'a [WhyConPose],
    pub tracks: &'a [Track],
    pub expected_count: usize,
    pub touchdown: Option<Touchdown>,
}

pub trait Mission {
    fn tick(&mut self, input: &TickInput, events: &mut [Vec<String>]) -> Vec<Directive>;

    fn finished(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone)]
pub struct PlatformSetup {
    pub state: PlatformState,
    /// Time windows in which the platform marker is hidden from the camera.
    pub occlusions: Vec<(f64, f64)>,
    /// Drone and platform touch when the marker height gap falls below this, meters.
    pub contact_gap: f64,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct SimSetup {
    pub camera: CameraModel,
    pub marker: MarkerSpec,
    pub timing: LoopTiming,
    pub budget: LatencyBudget,
    /// Spread of the PID loop duration, ms.
    pub pid_jitter_ms: f64,
    pub channel: ChannelModel,
    pub perception: PerceptionConfig,
    pub vehicle: VehicleParams,
    pub drift: Option<(f64, f64)>,
    pub disturbance: Disturbance,
    pub gains: AxisGains,
    pub throttle_trim: f64,
    /// Starting marker positions, WhyCon units.
    pub starts: Vec<Vec3>,
    pub platform: Option<PlatformSetup>,
    pub feedback: Feedback,
    pub seed: u64,
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub log: RunLog,
    pub touchdown: Option<Touchdown>,
    pub end_time: f64,
    pub count_changes: Vec<(f64, CountChange)>,
    /// `(capture time, actuation time)` for every delivered command.
    pub delays: Vec<(f64, f64)>,
    /// True platform marker position at every control tick, WhyCon units.
    pub platform_trace: Vec<(f64, Vec3)>,
    pub finished: bool,
}

/// Independent stream seeds derived from the run seed.
pub fn stream_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn to_whycon(cam: &CameraModel, world: &Vec3) -> Vec3 {
    UnitScale::default().meters_to_units(&cam.world_to_camera(world))
}

pub fn to_world(cam: &CameraModel, whycon: &Vec3) -> Vec3 {
    cam.camera_to_world(&UnitScale::default().units_to_meters(&WhyConPose::from_position(whycon)))
}

enum Event {
    Frame(u64),
    Publish { capture: f64, poses: Vec<WhyConPose>, changes: Vec<CountChange> },
    Send { drone: usize, command: CommandMessage, capture: f64 },
    Actuate { drone: usize, bytes: Vec<u8>, capture: f64 },
}

struct Scheduled {
    t: f64,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then(other.seq.cmp(&self.seq))
    }
}

struct DroneSim {
    state: DroneState,
    drift: DriftModel,
    command: CommandMessage,
    controller: PositionController,
    camera_pose: Option<WhyConPose>,
    /// Capture time behind the pose the last command was computed from.
    basis: f64,
    rng: ChaCha8Rng,
    landed: bool,
}

struct Sim<'m> {
    setup: SimSetup,
    mission: &'m mut dyn Mission,
    drones: Vec<DroneSim>,
    platform: Option<PlatformState>,
    tracker: TrackerState,
    queue: BinaryHeap<Scheduled>,
    seq: u64,
    now: f64,
    next_tick: f64,
    noise_rng: ChaCha8Rng,
    jitter_rng: ChaCha8Rng,
    renderer: Renderer,
    detector: Detector,
    published: Vec<WhyConPose>,
    pending_events: Vec<Vec<String>>,
    out: SimOutput,
}

/// Run the closed loop until `duration` or until the mission reports it is finished.
pub fn simulate(setup: SimSetup, mission: &mut dyn Mission) -> SimOutput {
    let cam = setup.camera;
    let mut starts: Vec<WhyConPose> = setup
        .starts
        .iter()
        .enumerate()
        .map(|(i, p)| WhyConPose::from_position(p).with_id(i as u32))
        .collect();
    let platform = setup.platform.as_ref().map(|p| p.state.clone());
    if let Some(p) = &platform {
        starts.push(WhyConPose::from_position(&to_whycon(&cam, &p.position)).with_id(starts.len() as u32));
    }
    let tracker = TrackerState::new(&starts).with_miss_window(setup.perception.miss_window);
    let drones = setup
        .starts
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let drift = match setup.drift {
                Some((walk, rate)) => DriftModel::new(walk, rate, stream_seed(setup.seed, 100 + i as u64)),
                None => DriftModel::off(),
            };
            let hover = CommandMessage {
                rc_throttle: crate::vehicle::clamp_pwm(setup.vehicle.hover_pwm.round() as i64),
                ..CommandMessage::arm(i as u8)
            };
            DroneSim {
                state: DroneState::hovering(i as u8, to_world(&cam, p)),
                drift,
                command: hover,
                controller: PositionController::new(setup.gains, setup.timing, setup.throttle_trim, i as u8),
                camera_pose: None,
                basis: 0.0,
                rng: ChaCha8Rng::seed_from_u64(stream_seed(setup.seed, 200 + i as u64)),
                landed: false,
            }
        })
        .collect::<Vec<_>>();
    let n = drones.len();
    let mut sim = Sim {
        renderer: Renderer::new(Default::default(), setup.perception.render_noise),
        detector: Detector {
            spec: setup.marker,
            ..Detector::default()
        },
        noise_rng: ChaCha8Rng::seed_from_u64(stream_seed(setup.seed, 1)),
        jitter_rng: ChaCha8Rng::seed_from_u64(stream_seed(setup.seed, 2)),
        setup,
        mission,
        drones,
        platform,
        tracker,
        queue: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        next_tick: 0.0,
        published: Vec::new(),
        pending_events: vec![Vec::new(); n],
        out: SimOutput {
            log: RunLog::default(),
            touchdown: None,
            end_time: 0.0,
            count_changes: Vec::new(),
            delays: Vec::new(),
            platform_trace: Vec::new(),
            finished: false,
        },
    };
    sim.run();
    sim.out
}

impl Sim<'_> {
    fn schedule(&mut self, t: f64, event: Event) {
        self.seq += 1;
        self.queue.push(Scheduled { t, seq: self.seq, event });
    }

    fn run(&mut self) {
        self.schedule(0.0, Event::Frame(0));
        while let Some(s) = self.queue.pop() {
            if s.t > self.setup.duration {
                break;
            }
            self.advance(s.t);
            match s.event {
                Event::Frame(k) => self.frame(k),
                Event::Publish { capture, poses, changes } => self.publish(capture, poses, changes),
                Event::Send { drone, command, capture } => self.send(drone, command, capture),
                Event::Actuate { drone, bytes, capture } => self.actuate(drone, &bytes, capture),
            }
            if self.mission.finished() {
                self.out.finished = true;
                break;
            }
        }
        self.out.end_time = self.now;
    }

    fn advance(&mut self, t: f64) {
        let max_step = self.setup.camera.frame_period().min(MAX_STEP);
        while t - self.now > 1e-12 {
            let h = (t - self.now).min(max_step);
            self.step_physics(h);
            self.now += h;
        }
        self.now = self.now.max(t);
    }

    fn step_physics(&mut self, h: f64) {
        if let Some(p) = &self.platform {
            self.platform = crate::vehicle::step_platform(p, h).ok().or(Some(p.clone()));
        }
        let dist = self.setup.disturbance;
        let params = self.setup.vehicle;
        for (i, d) in self.drones.iter_mut().enumerate() {
            if d.landed {
                if let Some(p) = &self.platform {
                    d.state.position = p.position;
                }
                continue;
            }
            if !d.state.armed {
                continue;
            }
            if let Ok(next) = step_drone(&d.state, &d.command, h, &params, &mut d.drift) {
                d.state = next;
            }
            if dist.velocity_std > 0.0 || dist.vertical_std > 0.0 {
                let s = h.sqrt();
                for axis in 0..2 {
                    let n: f64 = StandardNormal.sample(&mut d.rng);
                    d.state.velocity[axis] += dist.velocity_std * s * n;
                }
                let n: f64 = StandardNormal.sample(&mut d.rng);
                d.state.position.z = (d.state.position.z + dist.vertical_std * s * n).max(0.0);
            }
            if let (Some(p), Some(setup)) = (&self.platform, &self.setup.platform) {
                let gap = d.state.position.z - p.position.z;
                let horizontal = (d.state.position.xy() - p.position.xy()).norm();
                if self.out.touchdown.is_none() && gap <= setup.contact_gap && horizontal <= setup.radius {
                    d.landed = true;
                    d.state.armed = false;
                    self.out.touchdown = Some(Touchdown {
                        time: self.now + h,
                        drone: i,
                        offset: UnitScale::default().to_units(horizontal),
                    });
                }
            }
        }
    }

    fn hidden(&self, t: f64) -> bool {
        self.setup
            .platform
            .as_ref()
            .is_some_and(|p| p.occlusions.iter().any(|&(a, b)| t >= a && t < b))
    }

    fn markers(&self, t: f64) -> Vec<Vec3> {
        let mut world: Vec<Vec3> = self.drones.iter().map(|d| d.state.position).collect();
        if let Some(p) = &self.platform {
            if !self.hidden(t) {
                world.push(p.position);
            }
        }
        world
    }

    fn frame(&mut self, k: u64) {
        let cam = self.setup.camera;
        let period = cam.frame_period();
        let t = self.now;
        let world = self.markers(t);
        let cfg = self.setup.perception;
        let detections: Vec<WhyConPose> = match cfg.mode {
            PerceptionMode::Direct => {
                let nxy = Normal::new(0.0, cfg.noise_xy.max(0.0)).unwrap();
                let nz = Normal::new(0.0, cfg.noise_z.max(0.0)).unwrap();
                world
                    .iter()
                    .filter(|p| cam.sees(p, cfg.margin_px))
                    .map(|p| {
                        let w = to_whycon(&cam, p);
                        let r = &mut self.noise_rng;
                        WhyConPose::new(w.x + nxy.sample(r), w.y + nxy.sample(r), w.z + nz.sample(r))
                    })
                    .collect()
            }
            PerceptionMode::Rendered => {
                let placements: Vec<MarkerPlacement> = world
                    .iter()
                    .filter(|p| cam.sees(p, cfg.margin_px))
                    .map(|p| MarkerPlacement::level(self.setup.marker, *p))
                    .collect();
                let image = self.renderer.render_noisy(&placements, &cam, &mut self.noise_rng);
                self.detector
                    .detect(&image, self.tracker.detection_limit())
                    .iter()
                    .filter_map(|d| localize(d, &cam, &self.setup.marker, &UnitScale::default()).ok())
                    .collect()
            }
        };
        let outcome = self.tracker.track(&detections);
        let mut changes = Vec::new();
        if let Some(c) = self.tracker.adapt_count() {
            changes.push(c);
        }
        let mut poses: Vec<WhyConPose> = outcome
            .assignments
            .iter()
            .map(|&(id, di)| WhyConPose { id, timestamp: t, ..detections[di] })
            .collect();
        if self.platform.is_some() && self.drones.len() == 1 {
            self.identify_by_depth(&mut poses);
        }
        let perception = self.setup.budget.perception();
        self.schedule(t + perception, Event::Publish { capture: t, poses, changes });
        self.schedule((k + 1) as f64 * period, Event::Frame(k + 1));
    }

    /// The drone flies above the platform, so of two clearly separated
    /// markers the nearer one to the camera is the drone.
    fn identify_by_depth(&mut self, poses: &mut [WhyConPose]) {
        let Ok((drone, platform)) = disambiguate_by_z(poses) else {
            return;
        };
        if platform.z - drone.z < DEPTH_MARGIN || drone.id == 0 {
            return;
        }
        let id = drone.id;
        self.tracker.swap_ids(0, id);
        for p in poses.iter_mut() {
            if p.id == id {
                p.id = 0;
            } else if p.id == 0 {
                p.id = id;
            }
        }
    }

    fn publish(&mut self, _capture: f64, poses: Vec<WhyConPose>, changes: Vec<CountChange>) {
        for c in changes {
            let text = match &c {
                CountChange::Decreased { from, to, .. } => format!("count {from}->{to}"),
                CountChange::Increased { from, to, .. } => format!("count {from}->{to}"),
            };
            self.pending_events[0].push(text);
            self.out.count_changes.push((self.now, c));
        }
        for d in &mut self.drones {
            let id = d.state.index as u32;
            if let Some(p) = poses.iter().find(|p| p.id == id) {
                d.camera_pose = Some(*p);
            }
        }
        self.published = poses;
        if self.now + 1e-9 >= self.next_tick {
            self.next_tick = self.now + self.setup.timing.sample_time;
            self.tick();
        }
    }

    fn feedback(&self, i: usize) -> Option<WhyConPose> {
        let d = &self.drones[i];
        match self.setup.feedback {
            Feedback::Camera => d.camera_pose,
            Feedback::Internal => {
                let w = to_whycon(&self.setup.camera, &d.state.estimate.position);
                Some(WhyConPose::from_position(&w).with_id(i as u32).at(self.now))
            }
        }
    }

    fn tick(&mut self) {
        let t = self.now;
        let n = self.drones.len();
        let feedback: Vec<Option<WhyConPose>> = (0..n).map(|i| self.feedback(i)).collect();
        let mut events = std::mem::replace(&mut self.pending_events, vec![Vec::new(); n]);
        let directives = {
            let input = TickInput {
                t,
                feedback: &feedback,
                published: &self.published,
                tracks: self.tracker.tracks(),
                expected_count: self.tracker.expected_count,
                touchdown: self.out.touchdown,
            };
            self.mission.tick(&input, &mut events)
        };
        let cam = self.setup.camera;
        let trim = self.setup.throttle_trim;
        if let Some(p) = &self.platform {
            self.out.platform_trace.push((t, to_whycon(&cam, &p.position)));
        }
        for i in 0..n {
            let directive = directives.get(i).copied().unwrap_or(Directive::Idle);
            let truth = to_whycon(&cam, &self.drones[i].state.position);
            let visible = self.published.iter().any(|p| p.id == i as u32);
            let in_fov = cam.sees(&self.drones[i].state.position, 0.0);
            let fb = feedback[i];
            let mut row = LogRow::new(t, i, truth, fb.map(|p| p.position()), visible, in_fov);
            let command = match directive {
                Directive::Idle => None,
                Directive::Send(cmd) => Some(cmd),
                Directive::Track { setpoint, overrides } => {
                    row.setpoint = Some(Vec3::new(setpoint.x, setpoint.y, setpoint.z));
                    let pose = fb.unwrap_or_else(|| WhyConPose::new(f64::NAN, f64::NAN, f64::NAN).at(f64::NEG_INFINITY));
                    let d = &mut self.drones[i];
                    match d.controller.update(&pose, &setpoint, t) {
                        Ok(out) => {
                            row.error = Some(out.error);
                            let mut cmd = out.command;
                            let neutral = crate::vehicle::PWM_NEUTRAL as f64;
                            if let Some(u) = overrides[0] {
                                cmd.rc_pitch = crate::vehicle::clamp_pwm((neutral + u).round() as i64);
                            }
                            if let Some(u) = overrides[1] {
                                cmd.rc_roll = crate::vehicle::clamp_pwm((neutral - u).round() as i64);
                            }
                            if let Some(u) = overrides[2] {
                                cmd.rc_throttle = crate::vehicle::clamp_pwm((neutral + trim + u).round() as i64);
                            }
                            Some(cmd)
                        }
                        Err(ControlError::StalePose { neutral, .. }) => {
                            events[i].push("stale".into());
                            d.controller.states.reset();
                            let hover = crate::vehicle::clamp_pwm((neutral.rc_throttle as f64 + trim).round() as i64);
                            Some(CommandMessage {
                                rc_throttle: hover,
                                ..neutral
                            })
                        }
                        Err(_) => None,
                    }
                }
            };
            if let Some(cmd) = command {
                row.set_command(&cmd);
                let jitter = if self.setup.pid_jitter_ms > 0.0 {
                    Normal::new(0.0, self.setup.pid_jitter_ms).unwrap().sample(&mut self.jitter_rng)
                } else {
                    0.0
                };
                let delay = ((self.setup.budget.pid_loop + jitter) / 1000.0).max(0.0);
                let capture = fb.map_or(t, |p| p.timestamp);
                self.drones[i].basis = capture;
                self.schedule(t + delay, Event::Send { drone: i, command: cmd, capture });
            }
            row.events = events[i].join(";");
            self.out.log.rows.push(row);
        }
    }

    fn send(&mut self, drone: usize, command: CommandMessage, capture: f64) {
        let Ok(frame) = command_frame(&command) else {
            return;
        };
        let budget = self.setup.budget;
        if let Delivery::Delivered { t_deliver, frame, .. } = self.setup.channel.send(&budget, frame, drone as u8, self.now) {
            self.schedule(t_deliver, Event::Actuate { drone, bytes: frame.to_bytes(), capture });
        }
    }

    fn actuate(&mut self, drone: usize, bytes: &[u8], capture: f64) {
        let decoded = decode(bytes);
        let Some(Ok(frame)) = decoded.into_iter().next() else {
            return;
        };
        if let Ok(cmd) = decode_command(&frame, drone as u8) {
            let d = &mut self.drones[drone];
            if cmd.rc_aux4 < self.setup.vehicle.arm_threshold {
                d.state.armed = false;
            }
            d.command = cmd;
            self.out.delays.push((capture, self.now));
        }
    }
}
