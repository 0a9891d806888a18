use serde::{Deserialize, Serialize};

use super::MarkerError;
use crate::geometry::WhyConPose;

const TIE_EPSILON: f64 = 1e-9;
/// Unmatched detections within this distance of the pending candidate count
/// as the same newcomer, WhyCon units.
const CANDIDATE_GATE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: u32,
    pub pose: WhyConPose,
    pub misses: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    pose: WhyConPose,
    frames: u32,
}

/// Identity bookkeeping for a fixed-camera, multi-marker scene.
///
/// `expected_count` is the number of markers the detector is currently
/// asked to find; it shrinks when a track goes missing for
/// `miss_window` frames and grows back when an unexplained blob persists
/// for the same number of frames.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerState {
    pub expected_count: usize,
    pub max_count: usize,
    pub miss_window: u32,
    tracks: Vec<Track>,
    next_id: u32,
    candidate: Option<Candidate>,
}

/// Two candidate pairings were equally close; the lower detection index
/// (then the lower track id) won.
#[derive(Debug, Clone, PartialEq)]
pub struct Ambiguity {
    pub detection: usize,
    pub winner: u32,
    pub contenders: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrackOutcome {
    /// `(track id, detection index)`
    pub assignments: Vec<(u32, usize)>,
    pub unmatched: Vec<usize>,
    pub ambiguities: Vec<Ambiguity>,
}

impl TrackOutcome {
    pub fn detection_for(&self, id: u32) -> Option<usize> {
        self.assignments.iter().find(|a| a.0 == id).map(|a| a.1)
    }

    pub fn ambiguity_error(&self) -> Option<MarkerError> {
        self.ambiguities.first().map(|a| MarkerError::AmbiguousAssignment {
            detection: a.detection,
            winner: a.winner,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountChange {
    Decreased { from: usize, to: usize, dropped: Vec<u32> },
    Increased { from: usize, to: usize, added: u32 },
}

impl TrackerState {
    /// One track per start pose, keyed by `pose.id`.
    pub fn new(start: &[WhyConPose]) -> Self {
        let mut tracks: Vec<Track> = start
            .iter()
            .map(|p| Track {
                id: p.id,
                pose: *p,
                misses: 0,
            })
            .collect();
        tracks.sort_by_key(|t| t.id);
        tracks.dedup_by_key(|t| t.id);
        let next_id = tracks.last().map_or(0, |t| t.id + 1);
        Self {
            expected_count: tracks.len(),
            max_count: tracks.len(),
            miss_window: 5,
            tracks,
            next_id,
            candidate: None,
        }
    }

    pub fn with_miss_window(mut self, frames: u32) -> Self {
        self.miss_window = frames;
        self
    }

    pub fn with_max_count(mut self, max_count: usize) -> Self {
        self.max_count = max_count.max(self.expected_count);
        self
    }

    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    pub fn get(&self, id: u32) -> Option<&Track> {
        self.tracks.iter().find(|t| t.id == id)
    }

    /// How many detections to request per frame: the expected count plus one
    /// probe slot while below the maximum.
    pub fn detection_limit(&self) -> usize {
        if self.expected_count < self.max_count {
            self.expected_count + 1
        } else {
            self.expected_count
        }
    }

    pub fn pending_frames(&self) -> u32 {
        self.candidate.map_or(0, |c| c.frames)
    }

    /// Exchange the ids of two tracks, for when an outside cue shows the
    /// association swapped them.
    pub fn swap_ids(&mut self, a: u32, b: u32) {
        for t in &mut self.tracks {
            if t.id == a {
                t.id = b;
                t.pose.id = b;
            } else if t.id == b {
                t.id = a;
                t.pose.id = a;
            }
        }
    }

    /// Greedy nearest-neighbor association, closest pair first.
    pub fn track(&mut self, detections: &[WhyConPose]) -> TrackOutcome {
        let mut pairs = Vec::with_capacity(self.tracks.len() * detections.len());
        for (ti, t) in self.tracks.iter().enumerate() {
            for (di, d) in detections.iter().enumerate() {
                pairs.push((t.pose.distance(d), di, t.id, ti));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut track_used = vec![false; self.tracks.len()];
        let mut det_used = vec![false; detections.len()];
        let mut outcome = TrackOutcome::default();
        for (k, &(dist, di, id, ti)) in pairs.iter().enumerate() {
            if track_used[ti] || det_used[di] {
                continue;
            }
            let rivals: Vec<u32> = pairs[k + 1..]
                .iter()
                .take_while(|p| p.0 - dist <= TIE_EPSILON)
                .filter(|p| !track_used[p.3] && !det_used[p.1] && (p.1 == di || p.3 == ti))
                .map(|p| p.2)
                .collect();
            if !rivals.is_empty() {
                let mut contenders = vec![id];
                contenders.extend(rivals);
                contenders.sort_unstable();
                contenders.dedup();
                outcome.ambiguities.push(Ambiguity {
                    detection: di,
                    winner: id,
                    contenders,
                });
            }
            track_used[ti] = true;
            det_used[di] = true;
            outcome.assignments.push((id, di));
        }

        for (ti, t) in self.tracks.iter_mut().enumerate() {
            if track_used[ti] {
                let di = outcome.detection_for(t.id).expect("assigned");
                t.pose = WhyConPose {
                    id: t.id,
                    ..detections[di]
                };
                t.misses = 0;
            } else {
                t.misses += 1;
            }
        }

        outcome.unmatched = (0..detections.len()).filter(|&i| !det_used[i]).collect();
        self.update_candidate(detections, &outcome.unmatched);
        outcome.assignments.sort_unstable();
        outcome
    }

    fn update_candidate(&mut self, detections: &[WhyConPose], unmatched: &[usize]) {
        let pick = match self.candidate {
            Some(c) => unmatched
                .iter()
                .map(|&i| (c.pose.distance(&detections[i]), i))
                .filter(|&(d, _)| d <= CANDIDATE_GATE)
                .min_by(|a, b| a.0.total_cmp(&b.0))
                .map(|(_, i)| (i, c.frames + 1)),
            None => None,
        }
        .or_else(|| unmatched.first().map(|&i| (i, 1)));
        self.candidate = pick.map(|(i, frames)| Candidate {
            pose: detections[i],
            frames,
        });
    }

    /// Re-initialize the expected target count after persistent misses or a
    /// persistent newcomer. Surviving tracks keep their ids and poses.
    pub fn adapt_count(&mut self) -> Option<CountChange> {
        let window = self.miss_window.max(1);
        let dropped: Vec<u32> = self
            .tracks
            .iter()
            .filter(|t| t.misses >= window)
            .map(|t| t.id)
            .collect();
        if !dropped.is_empty() && self.expected_count >= 1 {
            let from = self.expected_count;
            self.tracks.retain(|t| t.misses < window);
            for t in &mut self.tracks {
                t.misses = 0;
            }
            self.expected_count = self.tracks.len();
            return Some(CountChange::Decreased {
                from,
                to: self.expected_count,
                dropped,
            });
        }
        if let Some(c) = self.candidate {
            if c.frames >= window && self.expected_count < self.max_count {
                let from = self.expected_count;
                let id = self.next_id;
                self.next_id += 1;
                self.tracks.push(Track {
                    id,
                    pose: WhyConPose { id, ..c.pose },
                    misses: 0,
                });
                self.expected_count = self.tracks.len();
                self.candidate = None;
                return Some(CountChange::Increased {
                    from,
                    to: self.expected_count,
                    added: id,
                });
            }
        }
        None
    }
}

/// Label a drone/platform pair: the drone flies nearer the overhead camera,
/// so it has the smaller depth. Returns `(drone, platform)`.
pub fn disambiguate_by_z(poses: &[WhyConPose]) -> Result<(WhyConPose, WhyConPose), MarkerError> {
    const MIN_SEPARATION: f64 = 0.05;
    let [a, b] = poses else {
        return Err(MarkerError::WrongPoseCount(poses.len()));
    };
    if (a.z - b.z).abs() < MIN_SEPARATION {
        return Err(MarkerError::EqualZ);
    }
    Ok(if a.z < b.z { (*a, *b) } else { (*b, *a) })
}
