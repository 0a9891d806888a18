use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::sim::{Disturbance, PerceptionConfig};
use super::HarnessError;
use crate::control::{compute_sample_time, AxisGains, AxisRanges, ControllerType, LoopTiming, PidGains};
use crate::geometry::{CameraModel, HomogeneousTransform, Vec3};
use crate::marker::MarkerSpec;
use crate::msp::LatencyBudget;
use crate::planning::{Aabb, Hoop, RrtConfig, Scene3D};
use crate::vehicle::VehicleParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    PositionHold,
    InternalOnlyDrift,
    WaypointNav,
    ZnAutotune,
    IterativeAutotune,
    MovingPlatformLanding,
    HoopTraversal,
    FormationCircle,
    FormationSquare,
    FormationRotation,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 10] = [
        ScenarioKind::PositionHold,
        ScenarioKind::InternalOnlyDrift,
        ScenarioKind::WaypointNav,
        ScenarioKind::ZnAutotune,
        ScenarioKind::IterativeAutotune,
        ScenarioKind::MovingPlatformLanding,
        ScenarioKind::HoopTraversal,
        ScenarioKind::FormationCircle,
        ScenarioKind::FormationSquare,
        ScenarioKind::FormationRotation,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioKind::PositionHold => "position_hold",
            ScenarioKind::InternalOnlyDrift => "internal_only_drift",
            ScenarioKind::WaypointNav => "waypoint_nav",
            ScenarioKind::ZnAutotune => "zn_autotune",
            ScenarioKind::IterativeAutotune => "iterative_autotune",
            ScenarioKind::MovingPlatformLanding => "moving_platform_landing",
            ScenarioKind::HoopTraversal => "hoop_traversal",
            ScenarioKind::FormationCircle => "formation_circle",
            ScenarioKind::FormationSquare => "formation_square",
            ScenarioKind::FormationRotation => "formation_rotation",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::config("scenario", format!("unknown scenario {s:?}")))
    }
}

/// Overhead camera described by its mounting height instead of a full transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub k1: f64,
    pub k2: f64,
    pub width: u32,
    pub height: u32,
    pub fps: f64,
    /// Meters above the floor.
    pub mount_height: f64,
}

impl Default for CameraConfig {
    fn default() -> Self {
        let c = CameraModel::default();
        Self {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            k1: c.k1,
            k2: c.k2,
            width: c.width,
            height: c.height,
            fps: c.fps,
            mount_height: 4.0,
        }
    }
}

impl CameraConfig {
    pub fn model(&self) -> CameraModel {
        CameraModel {
            fx: self.fx,
            fy: self.fy,
            cx: self.cx,
            cy: self.cy,
            k1: self.k1,
            k2: self.k2,
            extrinsics: HomogeneousTransform::half_turn_y(Vec3::new(0.0, 0.0, self.mount_height)),
            width: self.width,
            height: self.height,
            fps: self.fps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingConfig {
    /// Worst-case PID computation time, seconds.
    pub pid_time: f64,
    pub buffer: f64,
}

impl Default for TimingConfig {
    fn default() -> Self {
        Self {
            pid_time: 0.1,
            buffer: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LatencyConfig {
    pub budget: LatencyBudget,
    /// Spread of the PID loop duration, ms.
    pub pid_jitter_ms: f64,
    pub channel_jitter_ms: f64,
    pub drop_probability: f64,
    pub per_hop_ms: f64,
}

impl Default for LatencyConfig {
    fn default() -> Self {
        Self {
            budget: LatencyBudget::default(),
            pid_jitter_ms: 10.0,
            channel_jitter_ms: 0.0,
            drop_probability: 0.0,
            per_hop_ms: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftConfig {
    pub enabled: bool,
    /// m/s per √s.
    pub velocity_walk_std: f64,
    /// m/s.
    pub altitude_bias_rate: f64,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            velocity_walk_std: 0.01,
            altitude_bias_rate: 0.01,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GainsConfig {
    pub roll: PidGains,
    pub pitch: PidGains,
    pub throttle: PidGains,
    /// PWM added to the throttle channel on top of the PID output.
    pub throttle_trim: f64,
}

impl Default for GainsConfig {
    fn default() -> Self {
        Self {
            roll: PidGains::new(5.0, 0.3, 8.0),
            pitch: PidGains::new(5.0, 0.3, 8.0),
            throttle: PidGains::new(25.0, 4.0, 6.0),
            throttle_trim: 50.0,
        }
    }
}

impl GainsConfig {
    pub fn axis_gains(&self) -> AxisGains {
        AxisGains {
            roll: self.roll,
            pitch: self.pitch,
            throttle: self.throttle,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DroneConfig {
    /// Starting marker position, WhyCon units.
    pub start: [f64; 3],
}

/// Allowed error band per axis, WhyCon units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Envelope {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub z: [f64; 2],
    /// Share of samples that must lie inside the band.
    pub fraction: f64,
    /// No sample may exceed the band scaled by this factor.
    pub hard_factor: f64,
}

impl Default for Envelope {
    fn default() -> Self {
        Self {
            x: [-0.1, 1.8],
            y: [-0.9, 0.8],
            z: [-2.2, 2.0],
            fraction: 0.95,
            hard_factor: 2.0,
        }
    }
}

impl Envelope {
    pub fn band(&self, axis: usize) -> [f64; 2] {
        [self.x, self.y, self.z][axis]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoldConfig {
    /// Defaults to the drone's start.
    pub setpoint: Option<[f64; 3]>,
    pub envelope: Envelope,
    /// Seconds at the start of the run left out of the envelope check.
    pub settle: f64,
    /// Required truth error before leaving the field of view.
    pub divergence: f64,
}

impl Default for HoldConfig {
    fn default() -> Self {
        Self {
            setpoint: None,
            envelope: Envelope::default(),
            settle: 5.0,
            divergence: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaypointConfig {
    pub points: Vec<[f64; 3]>,
    pub tolerance: f64,
    pub dwell: f64,
}

impl Default for WaypointConfig {
    fn default() -> Self {
        Self {
            points: vec![[0.0, 0.0, 30.0], [0.0, 5.0, 30.0], [5.0, 5.0, 30.0], [0.0, 0.0, 30.0]],
            tolerance: 0.8,
            dwell: 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RelayScenarioConfig {
    /// Relay half-swing on the pitch channel, PWM.
    pub amplitude: f64,
    /// Dead band around the setpoint, WhyCon units.
    pub hysteresis: f64,
    pub cycles: usize,
    pub discard: usize,
    pub timeout: f64,
    /// Row of the tuning table applied to roll and pitch.
    pub controller: String,
    /// Setpoint change used to check the tuned gains, WhyCon units on x.
    pub step: f64,
    pub step_duration: f64,
}

impl Default for RelayScenarioConfig {
    fn default() -> Self {
        Self {
            amplitude: 25.0,
            hysteresis: 0.5,
            cycles: 6,
            discard: 2,
            timeout: 120.0,
            controller: ControllerType::NoOvershoot.name().to_string(),
            step: 4.0,
            step_duration: 60.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutotuneScenarioConfig {
    pub roll: AxisRanges,
    pub pitch: AxisRanges,
    pub throttle: AxisRanges,
    pub threshold: f64,
    pub threshold_prime: f64,
    pub kp_step: f64,
    pub ki_step: f64,
    pub kd_step: f64,
    pub max_iterations: usize,
    /// Simulated length of each trial, seconds.
    pub trial_duration: f64,
    /// Setpoint offset applied on every axis at the start of a trial, WhyCon units.
    pub step: f64,
    /// Control ticks averaged before the error reaches the tuner.
    pub smoothing: usize,
}

impl Default for AutotuneScenarioConfig {
    fn default() -> Self {
        let horizontal = AxisRanges::new((1.0, 12.0), (0.0, 3.0), (0.0, 14.0));
        Self {
            roll: horizontal,
            pitch: horizontal,
            throttle: AxisRanges::new((5.0, 40.0), (0.0, 10.0), (0.0, 8.0)),
            threshold: 1.0,
            threshold_prime: 0.5,
            kp_step: 0.1,
            ki_step: 0.5,
            kd_step: 0.05,
            max_iterations: 5000,
            trial_duration: 30.0,
            step: 3.0,
            smoothing: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LandingConfig {
    /// Center of the platform's circular track, WhyCon x and y.
    pub center: [f64; 2],
    /// Track radius, WhyCon units.
    pub radius: f64,
    /// Platform speed, m/s.
    pub speed: f64,
    /// Height of the platform marker above the floor, m.
    pub platform_height: f64,
    /// Landing pad radius, m.
    pub pad_radius: f64,
    /// Hover this far above the platform before descending, WhyCon units.
    pub hover_height: f64,
    /// Horizontal error below which descent may begin, WhyCon units.
    pub descend_threshold: f64,
    /// Minimum hover time before descent, s.
    pub hover_time: f64,
    /// WhyCon units per second.
    pub descent_rate: f64,
    pub contact_gap: f64,
    /// Windows in which the platform marker is hidden, `[start, end]` seconds.
    pub occlusions: Vec<[f64; 2]>,
    /// Seconds the setpoint leads the platform estimate.
    pub lead: f64,
}

impl Default for LandingConfig {
    fn default() -> Self {
        Self {
            center: [0.0, 0.0],
            radius: 4.0,
            speed: 0.05,
            platform_height: 0.15,
            pad_radius: 0.1,
            hover_height: 5.0,
            descend_threshold: 0.5,
            hover_time: 15.0,
            descent_rate: 0.3,
            contact_gap: 0.03,
            occlusions: vec![[7.0, 9.0]],
            lead: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HoopScenarioConfig {
    pub scene: Scene3D,
    /// Hoop indices in flying order.
    pub order: Vec<usize>,
    /// Final position after the last hoop, WhyCon units.
    pub end: Option<[f64; 3]>,
    pub standoff: f64,
    pub rrt: RrtConfig,
    /// Waypoint acceptance radius while flying the plans.
    pub tolerance: f64,
}

impl Default for HoopScenarioConfig {
    fn default() -> Self {
        let hoop = |x: f64, y: f64| Hoop::new(Vec3::new(x, y, 29.0), Vec3::x(), 2.0, 0.2);
        Self {
            scene: Scene3D {
                bounds: Aabb::new(Vec3::new(-8.0, -5.0, 25.0), Vec3::new(8.0, 5.0, 33.0)),
                hoops: vec![hoop(-4.5, 0.0), hoop(0.0, 1.5), hoop(4.5, -1.0)],
                boxes: Vec::new(),
            },
            order: vec![0, 1, 2],
            end: Some([7.0, 0.0, 29.0]),
            standoff: 1.2,
            rrt: RrtConfig::default(),
            tolerance: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FormationConfig {
    /// Circle radius, WhyCon units.
    pub radius: f64,
    pub center: [f64; 3],
    /// Angular spacing between drones, degrees.
    pub dist_apart: f64,
    /// A step advances once every drone is within this distance of its target.
    pub tolerance: f64,
    /// Square side, WhyCon units.
    pub side: f64,
    /// Times around the square.
    pub cycles: usize,
    /// Seconds each target is held after all drones arrive.
    pub dwell: f64,
}

impl Default for FormationConfig {
    fn default() -> Self {
        Self {
            radius: 6.0,
            center: [0.0, 0.0, 33.0],
            dist_apart: 0.0,
            tolerance: 0.8,
            side: 8.0,
            cycles: 2,
            dwell: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub dir: Option<String>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: None }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub seed: u64,
    /// Simulated seconds.
    pub duration: f64,
    pub camera: CameraConfig,
    pub marker: MarkerSpec,
    pub timing: TimingConfig,
    pub latency: LatencyConfig,
    pub perception: PerceptionConfig,
    pub vehicle: VehicleParams,
    pub drift: DriftConfig,
    pub disturbance: Disturbance,
    pub gains: GainsConfig,
    pub drones: Vec<DroneConfig>,
    pub hold: HoldConfig,
    pub waypoints: WaypointConfig,
    pub relay: RelayScenarioConfig,
    pub autotune: AutotuneScenarioConfig,
    pub landing: LandingConfig,
    pub hoops: HoopScenarioConfig,
    pub formation: FormationConfig,
    pub output: OutputConfig,
}

fn drones(starts: &[[f64; 3]]) -> Vec<DroneConfig> {
    starts.iter().map(|&start| DroneConfig { start }).collect()
}

impl ScenarioConfig {
    /// Defaults for a scenario; a config file only needs to name what differs.
    pub fn preset(kind: ScenarioKind) -> Self {
        let mut c = Self {
            scenario: kind,
            seed: 1,
            duration: 60.0,
            camera: CameraConfig::default(),
            marker: MarkerSpec::default(),
            timing: TimingConfig::default(),
            latency: LatencyConfig::default(),
            perception: PerceptionConfig::default(),
            vehicle: VehicleParams::default(),
            drift: DriftConfig::default(),
            disturbance: Disturbance {
                velocity_std: 0.01,
                vertical_std: 0.004,
            },
            gains: GainsConfig::default(),
            drones: drones(&[[0.0, 0.0, 30.0]]),
            hold: HoldConfig::default(),
            waypoints: WaypointConfig::default(),
            relay: RelayScenarioConfig::default(),
            autotune: AutotuneScenarioConfig::default(),
            landing: LandingConfig::default(),
            hoops: HoopScenarioConfig::default(),
            formation: FormationConfig::default(),
            output: OutputConfig::default(),
        };
        match kind {
            ScenarioKind::PositionHold => {
                c.vehicle.pitch_trim_deg = -0.25;
                c.gains.pitch.ki = 0.0;
                c.duration = 66.0;
            }
            ScenarioKind::InternalOnlyDrift => {
                c.drift = DriftConfig {
                    enabled: true,
                    velocity_walk_std: 0.03,
                    altitude_bias_rate: 0.01,
                };
                c.duration = 90.0;
            }
            ScenarioKind::WaypointNav => c.duration = 60.0,
            ScenarioKind::ZnAutotune => {
                c.drones = drones(&[[0.0, 0.0, 35.0]]);
                c.duration = 200.0;
            }
            ScenarioKind::IterativeAutotune => {
                c.perception.noise_z = 0.2;
                c.duration = 0.0;
            }
            ScenarioKind::MovingPlatformLanding => {
                c.perception.noise_z = 0.15;
                c.gains.roll.ki = 0.8;
                c.gains.pitch.ki = 0.8;
                c.drones = drones(&[[2.0, 3.0, 30.0]]);
                c.duration = 90.0;
            }
            ScenarioKind::HoopTraversal => {
                c.perception.noise_z = 0.2;
                c.drones = drones(&[[-7.0, 0.0, 29.0]]);
                c.duration = 120.0;
            }
            ScenarioKind::FormationCircle => {
                c.formation.radius = 6.0;
                c.drones = drones(&[[0.0, 6.0, 33.0]]);
                c.duration = 150.0;
            }
            ScenarioKind::FormationRotation => {
                c.formation.radius = 6.0;
                c.formation.dist_apart = 120.0;
                let r = c.formation.radius;
                let starts: Vec<[f64; 3]> = (0..3)
                    .map(|k| {
                        let a = (120.0 * k as f64).to_radians();
                        [r * a.sin(), r * a.cos(), 33.0]
                    })
                    .collect();
                c.drones = drones(&starts);
                c.duration = 150.0;
            }
            ScenarioKind::FormationSquare => {
                let h = c.formation.side / 2.0;
                c.drones = drones(&[[h, h, 33.0], [-h, -h, 33.0], [0.0, 0.0, 33.0]]);
                c.duration = 120.0;
            }
        }
        c
    }

    /// Parse TOML, filling every field the file omits from the scenario's preset.
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let user: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::config("", e.to_string()))?;
        let kind = match user.get("scenario") {
            Some(toml::Value::String(s)) => s.parse::<ScenarioKind>()?,
            Some(_) => return Err(HarnessError::config("scenario", "expected a string")),
            None => return Err(HarnessError::config("scenario", "missing field")),
        };
        let mut base = toml::Table::try_from(Self::preset(kind)).map_err(|e| HarnessError::config("", e.to_string()))?;
        merge(&mut base, user);
        let de = toml::Value::Table(base);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            HarnessError::config(path, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn loop_timing(&self) -> Result<LoopTiming, HarnessError> {
        compute_sample_time(self.camera.fps, self.timing.pid_time, self.timing.buffer)
            .map_err(|e| HarnessError::config("timing", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let finite_pos = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_pos(self.duration) {
            return Err(HarnessError::config("duration", "must be finite and non-negative"));
        }
        self.camera
            .model()
            .validate()
            .map_err(|e| HarnessError::config("camera", e.to_string()))?;
        if self.camera.fps <= 0.0 {
            return Err(HarnessError::config("camera.fps", "must be positive"));
        }
        if !(self.camera.mount_height > 0.0) {
            return Err(HarnessError::config("camera.mount_height", "must be positive"));
        }
        self.marker
            .validate()
            .map_err(|e| HarnessError::config("marker", e.to_string()))?;
        self.loop_timing()?;
        self.latency
            .budget
            .validate()
            .map_err(|e| HarnessError::config("latency.budget", e.to_string()))?;
        if !(0.0..=1.0).contains(&self.latency.drop_probability) {
            return Err(HarnessError::config("latency.drop_probability", "must lie in [0, 1]"));
        }
        for (name, v) in [
            ("latency.pid_jitter_ms", self.latency.pid_jitter_ms),
            ("latency.channel_jitter_ms", self.latency.channel_jitter_ms),
            ("latency.per_hop_ms", self.latency.per_hop_ms),
            ("perception.noise_xy", self.perception.noise_xy),
            ("perception.noise_z", self.perception.noise_z),
            ("perception.render_noise", self.perception.render_noise),
            ("disturbance.velocity_std", self.disturbance.velocity_std),
            ("disturbance.vertical_std", self.disturbance.vertical_std),
        ] {
            if !finite_pos(v) {
                return Err(HarnessError::config(name, "must be finite and non-negative"));
            }
        }
        for (axis, g) in [("roll", self.gains.roll), ("pitch", self.gains.pitch), ("throttle", self.gains.throttle)] {
            if !g.is_valid() {
                return Err(HarnessError::config(format!("gains.{axis}"), "gains must be finite and non-negative"));
            }
        }
        if self.drones.is_empty() {
            return Err(HarnessError::config("drones", "at least one drone is required"));
        }
        for (i, d) in self.drones.iter().enumerate() {
            if d.start.iter().any(|v| !v.is_finite()) || !(d.start[2] > 0.0) {
                return Err(HarnessError::config(format!("drones[{i}].start"), "needs finite values and positive depth"));
            }
        }
        match self.scenario {
            ScenarioKind::WaypointNav if self.waypoints.points.is_empty() => {
                return Err(HarnessError::config("waypoints.points", "waypoint list is empty"));
            }
            ScenarioKind::ZnAutotune => {
                self.relay
                    .controller
                    .parse::<ControllerType>()
                    .map_err(|e| HarnessError::config("relay.controller", e.to_string()))?;
            }
            ScenarioKind::FormationSquare if self.drones.len() != 3 => {
                return Err(HarnessError::config("drones", "square formation needs exactly 3 drones"));
            }
            ScenarioKind::HoopTraversal => {
                self.hoops
                    .scene
                    .validate(self.hoops.rrt.drone_radius)
                    .map_err(|e| HarnessError::config("hoops.scene", e.to_string()))?;
                if let Some(i) = self.hoops.order.iter().position(|&h| h >= self.hoops.scene.hoops.len()) {
                    return Err(HarnessError::config(format!("hoops.order[{i}]"), "no such hoop"));
                }
            }
            ScenarioKind::MovingPlatformLanding if !(self.landing.radius > 0.0 || self.landing.speed == 0.0) => {
                return Err(HarnessError::config("landing.radius", "a moving platform needs a positive radius"));
            }
            _ => {}
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, user: toml::Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate_and_roundtrip() {
        for kind in ScenarioKind::ALL {
            let c = ScenarioConfig::preset(kind);
            c.validate().unwrap();
            let back = ScenarioConfig::from_toml_str(&c.to_toml()).unwrap();
            assert_eq!(back, c, "{kind}");
        }
    }

    #[test]
    fn partial_file_keeps_preset() {
        let c = ScenarioConfig::from_toml_str("scenario = \"waypoint_nav\"\nseed = 9\n[gains.roll]\nkp = 3.0\nki = 0.0\nkd = 5.0\n").unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.gains.roll, PidGains::new(3.0, 0.0, 5.0));
        assert_eq!(c.gains.pitch, ScenarioConfig::preset(ScenarioKind::WaypointNav).gains.pitch);
    }

    #[test]
    fn errors_carry_field_path() {
        let err = ScenarioConfig::from_toml_str("scenario = \"position_hold\"\n[camera]\nfps = \"fast\"\n").unwrap_err();
        match err {
            HarnessError::Config { path, .. } => assert_eq!(path, "camera.fps"),
            other => panic!("{other:?}"),
        }
        let err = ScenarioConfig::from_toml_str("scenario = \"position_hold\"\n[latency]\ndrop_probability = 2.0\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { ref path, .. } if path == "latency.drop_probability"));
        let err = ScenarioConfig::from_toml_str("scenario = \"nope\"").unwrap_err();
        assert!(matches!(err, HarnessError::Config { ref path, .. } if path == "scenario"));
        let err = ScenarioConfig::from_toml_str("scenario = \"position_hold\"\ncolour = 1\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config { .. }));
    }

    #[test]
    fn reference_defaults() {
        let c = ScenarioConfig::preset(ScenarioKind::PositionHold);
        assert_eq!((c.camera.width, c.camera.height, c.camera.fps), (640, 480, 120.0));
        assert_eq!(crate::msp::total_latency(&c.latency.budget), 341.33);
        assert!((c.loop_timing().unwrap().sample_time - 0.118_333_333).abs() < 1e-9);
    }
}
