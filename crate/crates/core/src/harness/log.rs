use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::geometry::Vec3;
use crate::vehicle::CommandMessage;

/// One drone on one control tick. Positions are WhyCon units.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRow {
    pub t: f64,
    pub drone: usize,
    pub truth: Vec3,
    /// Pose the controller used, if one was available.
    pub estimate: Option<Vec3>,
    pub setpoint: Option<Vec3>,
    /// Estimate minus setpoint on x, y, z.
    pub error: Option<[f64; 3]>,
    pub rc_roll: Option<u16>,
    pub rc_pitch: Option<u16>,
    pub rc_yaw: Option<u16>,
    pub rc_throttle: Option<u16>,
    /// The latest perception batch contained this drone.
    pub visible: bool,
    /// The true position projects inside the image.
    pub in_fov: bool,
    pub events: String,
}

impl LogRow {
    pub fn new(t: f64, drone: usize, truth: Vec3, estimate: Option<Vec3>, visible: bool, in_fov: bool) -> Self {
        Self {
            t,
            drone,
            truth,
            estimate,
            setpoint: None,
            error: None,
            rc_roll: None,
            rc_pitch: None,
            rc_yaw: None,
            rc_throttle: None,
            visible,
            in_fov,
            events: String::new(),
        }
    }

    pub fn set_command(&mut self, cmd: &CommandMessage) {
        self.rc_roll = Some(cmd.rc_roll);
        self.rc_pitch = Some(cmd.rc_pitch);
        self.rc_yaw = Some(cmd.rc_yaw);
        self.rc_throttle = Some(cmd.rc_throttle);
    }

    /// Truth minus setpoint.
    pub fn truth_error(&self) -> Option<[f64; 3]> {
        self.setpoint.map(|s| {
            let d = self.truth - s;
            [d.x, d.y, d.z]
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    t: f64,
    drone: usize,
    truth_x: f64,
    truth_y: f64,
    truth_z: f64,
    est_x: Option<f64>,
    est_y: Option<f64>,
    est_z: Option<f64>,
    sp_x: Option<f64>,
    sp_y: Option<f64>,
    sp_z: Option<f64>,
    err_x: Option<f64>,
    err_y: Option<f64>,
    err_z: Option<f64>,
    rc_roll: Option<u16>,
    rc_pitch: Option<u16>,
    rc_yaw: Option<u16>,
    rc_throttle: Option<u16>,
    visible: u8,
    in_fov: u8,
    events: String,
}

impl From<&LogRow> for CsvRow {
    fn from(r: &LogRow) -> Self {
        Self {
            t: r.t,
            drone: r.drone,
            truth_x: r.truth.x,
            truth_y: r.truth.y,
            truth_z: r.truth.z,
            est_x: r.estimate.map(|e| e.x),
            est_y: r.estimate.map(|e| e.y),
            est_z: r.estimate.map(|e| e.z),
            sp_x: r.setpoint.map(|s| s.x),
            sp_y: r.setpoint.map(|s| s.y),
            sp_z: r.setpoint.map(|s| s.z),
            err_x: r.error.map(|e| e[0]),
            err_y: r.error.map(|e| e[1]),
            err_z: r.error.map(|e| e[2]),
            rc_roll: r.rc_roll,
            rc_pitch: r.rc_pitch,
            rc_yaw: r.rc_yaw,
            rc_throttle: r.rc_throttle,
            visible: r.visible as u8,
            in_fov: r.in_fov as u8,
            events: r.events.clone(),
        }
    }
}

impl From<CsvRow> for LogRow {
    fn from(c: CsvRow) -> Self {
        let v = |x: Option<f64>, y: Option<f64>, z: Option<f64>| Some(Vec3::new(x?, y?, z?));
        Self {
            t: c.t,
            drone: c.drone,
            truth: Vec3::new(c.truth_x, c.truth_y, c.truth_z),
            estimate: v(c.est_x, c.est_y, c.est_z),
            setpoint: v(c.sp_x, c.sp_y, c.sp_z),
            error: v(c.err_x, c.err_y, c.err_z).map(|e| [e.x, e.y, e.z]),
            rc_roll: c.rc_roll,
            rc_pitch: c.rc_pitch,
            rc_yaw: c.rc_yaw,
            rc_throttle: c.rc_throttle,
            visible: c.visible != 0,
            in_fov: c.in_fov != 0,
            events: c.events,
        }
    }
}

/// Per-tick record of a run, written as CSV.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunLog {
    pub rows: Vec<LogRow>,
}

impl RunLog {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn drone(&self, index: usize) -> impl Iterator<Item = &LogRow> + '_ {
        self.rows.iter().filter(move |r| r.drone == index)
    }

    pub fn drone_count(&self) -> usize {
        self.rows.iter().map(|r| r.drone + 1).max().unwrap_or(0)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record(CSV_HEADER)?;
        }
        for r in &self.rows {
            w.serialize(CsvRow::from(r))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        buf
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, HarnessError> {
        let mut r = csv::Reader::from_reader(bytes);
        let rows = r
            .deserialize::<CsvRow>()
            .map(|row| row.map(LogRow::from))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { rows })
    }
}

pub const CSV_HEADER: [&str; 21] = [
    "t", "drone", "truth_x", "truth_y", "truth_z", "est_x", "est_y", "est_z", "sp_x", "sp_y", "sp_z", "err_x",
    "err_y", "err_z", "rc_roll", "rc_pitch", "rc_yaw", "rc_throttle", "visible", "in_fov", "events",
];
