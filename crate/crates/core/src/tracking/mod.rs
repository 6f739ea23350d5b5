//! Tracking-by-detection in the deepsort style.
//!
//! Each frame the tracker predicts every live track forward with a
//! constant-velocity Kalman filter, scores all track-detection pairs with a
//! gated combination of Mahalanobis (motion) and cosine (appearance)
//! distances, solves the resulting assignment problem with the Hungarian
//! algorithm, and runs the track lifecycle: tentative tracks confirm after a
//! streak of hits, missed tentative tracks die immediately, and confirmed
//! tracks die once unseen for longer than `max_age` frames.
//!
//! The tracker is a single-writer state machine: call [`Tracker::step`] from
//! one owner in frame order. The metric functions themselves are pure.

mod assignment;
mod kalman;
mod metrics;

pub use assignment::{assignment_cost, solve_assignment, FORBIDDEN_COST};
pub use kalman::{
    mahalanobis_squared, KalmanConfig, KalmanFilter, KalmanState, Measurement, MeasurementCov,
    MeasurementVector, StateCov, StateMean,
};
pub use metrics::{cosine_distance, gate_and_cost, AssociationCost, MAHALANOBIS_GATE_95};

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::BoundingBox;

#[derive(Debug, Error, PartialEq)]
pub enum TrackingError {
    #[error("measurement must have positive aspect and height (aspect={aspect}, height={height})")]
    InvalidMeasurement { aspect: f64, height: f64 },
    #[error("innovation covariance is not positive definite")]
    SingularInnovation,
    #[error("appearance gallery is empty")]
    EmptyGallery,
    #[error("descriptor dimension mismatch: expected {expected}, got {got}")]
    DescriptorDimension { expected: usize, got: usize },
}

/// Lifecycle state of a track. Transitions are one-way:
/// Tentative -> Confirmed, Tentative -> Deleted, Confirmed -> Deleted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackStatus {
    Tentative,
    Confirmed,
    Deleted,
}

/// One tracked identity.
#[derive(Debug, Clone)]
pub struct Track {
    pub id: u64,
    pub state: KalmanState,
    pub status: TrackStatus,
    /// Number of successful measurement associations.
    pub hits: u32,
    /// Frames since the last successful association; reset to 0 on a hit.
    pub frames_since_update: u32,
    /// Total frames this track has been alive.
    pub age: u32,
    gallery: VecDeque<DVector<f64>>,
}

impl Track {
    pub fn bbox(&self) -> BoundingBox {
        self.state.bbox()
    }

    pub fn is_confirmed(&self) -> bool {
        self.status == TrackStatus::Confirmed
    }

    /// Appearance descriptors seen by this track, most recent last.
    pub fn gallery(&self) -> impl Iterator<Item = &DVector<f64>> {
        self.gallery.iter()
    }

    fn push_descriptor(&mut self, descriptor: DVector<f64>, capacity: usize) {
        self.gallery.push_back(descriptor);
        while self.gallery.len() > capacity {
            self.gallery.pop_front();
        }
    }
}

/// Tracker input for one detected person in one frame. The descriptor, when
/// present, must be unit-norm; it is treated as an opaque appearance vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub measurement: Measurement,
    pub descriptor: Option<DVector<f64>>,
}

impl Detection {
    pub fn new(measurement: Measurement) -> Self {
        Self {
            measurement,
            descriptor: None,
        }
    }

    pub fn with_descriptor(measurement: Measurement, descriptor: DVector<f64>) -> Self {
        Self {
            measurement,
            descriptor: Some(descriptor),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Gate on the squared Mahalanobis distance.
    pub motion_gate: f64,
    /// Gate on the cosine appearance distance. Tune per descriptor source.
    pub appearance_gate: f64,
    /// Weight of the motion term in the combined cost; the appearance term
    /// gets `1 - weight`. `None` selects 0.0 for pairs with appearance
    /// information (motion acts as a gate only) and falls back to pure
    /// motion cost for pairs without it.
    pub motion_weight: Option<f64>,
    /// A track unseen for more than this many frames is deleted.
    pub max_age: u32,
    /// Consecutive hits (counting initiation) required to confirm a track.
    pub confirm_hits: u32,
    /// Bound on the per-track appearance gallery; oldest entries evict first.
    pub gallery_capacity: usize,
    pub kalman: KalmanConfig,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            motion_gate: MAHALANOBIS_GATE_95,
            appearance_gate: 0.2,
            motion_weight: None,
            max_age: 30,
            confirm_hits: 3,
            gallery_capacity: 100,
            kalman: KalmanConfig::default(),
        }
    }
}

/// Result of matching one frame of detections against the live tracks.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Association {
    /// Matched `(track_id, detection_index)` pairs, sorted by track id.
    pub matches: Vec<(u64, usize)>,
    pub unmatched_tracks: Vec<u64>,
    pub unmatched_detections: Vec<usize>,
}

/// Lifecycle notifications emitted by [`Tracker::step`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrackEvent {
    Created(u64),
    Confirmed(u64),
    Deleted(u64),
}

/// Matches tracks to detections by minimizing the summed combined cost over
/// admissible pairs, among all maximum matchings restricted to admissible
/// pairs.
///
/// Pairs where either side lacks appearance information fall back to a pure
/// motion cost with the appearance gate vacuously satisfied.
pub fn associate(
    filter: &KalmanFilter,
    config: &TrackerConfig,
    tracks: &[Track],
    detections: &[Detection],
) -> Result<Association, TrackingError> {
    if tracks.is_empty() || detections.is_empty() {
        return Ok(Association {
            matches: Vec::new(),
            unmatched_tracks: tracks.iter().map(|t| t.id).collect(),
            unmatched_detections: (0..detections.len()).collect(),
        });
    }

    let mut cost = DMatrix::from_element(tracks.len(), detections.len(), FORBIDDEN_COST);
    let mut any_admissible = false;
    for (ti, track) in tracks.iter().enumerate() {
        // one factorization per track, reused across the row
        let (projected, innovation_cov) = filter.project(&track.state);
        let chol = nalgebra::Cholesky::new(innovation_cov)
            .ok_or(TrackingError::SingularInnovation)?;
        for (di, detection) in detections.iter().enumerate() {
            let residual = detection.measurement.as_vector() - projected;
            let motion = residual.dot(&chol.solve(&residual));
            if motion >= config.motion_gate {
                // inadmissible regardless of appearance; skip the gallery scan
                continue;
            }
            let scored = match &detection.descriptor {
                Some(descriptor) if !track.gallery.is_empty() => {
                    let appearance = cosine_distance(&track.gallery, descriptor)?;
                    gate_and_cost(
                        motion,
                        appearance,
                        config.motion_gate,
                        config.appearance_gate,
                        config.motion_weight.unwrap_or(0.0),
                    )
                }
                // no appearance information for this pair
                _ => gate_and_cost(motion, 0.0, config.motion_gate, f64::INFINITY, 1.0),
            };
            if scored.admissible {
                cost[(ti, di)] = scored.combined;
                any_admissible = true;
            }
        }
    }

    let mut association = Association::default();
    let mut track_matched = vec![false; tracks.len()];
    let mut detection_matched = vec![false; detections.len()];
    if any_admissible {
        for (ti, di) in solve_assignment(&cost) {
            if cost[(ti, di)] < FORBIDDEN_COST {
                association.matches.push((tracks[ti].id, di));
                track_matched[ti] = true;
                detection_matched[di] = true;
            }
        }
    }
    association.unmatched_tracks = tracks
        .iter()
        .zip(&track_matched)
        .filter(|(_, &m)| !m)
        .map(|(t, _)| t.id)
        .collect();
    association.unmatched_detections = (0..detections.len())
        .filter(|&di| !detection_matched[di])
        .collect();
    Ok(association)
}

/// Multi-target tracker state machine.
#[derive(Debug)]
pub struct Tracker {
    config: TrackerConfig,
    filter: KalmanFilter,
    tracks: Vec<Track>,
    next_id: u64,
}

impl Default for Tracker {
    fn default() -> Self {
        Self::new(TrackerConfig::default())
    }
}

impl Tracker {
    pub fn new(config: TrackerConfig) -> Self {
        let filter = KalmanFilter::new(config.kalman);
        Self {
            config,
            filter,
            tracks: Vec::new(),
            next_id: 1,
        }
    }

    pub fn config(&self) -> &TrackerConfig {
        &self.config
    }

    pub fn filter(&self) -> &KalmanFilter {
        &self.filter
    }

    /// Live (tentative or confirmed) tracks, ordered by ascending id.
    pub fn tracks(&self) -> &[Track] {
        &self.tracks
    }

    /// Advances the tracker by one frame. Detections must already be
    /// filtered by confidence.
    ///
    /// Matched tracks get a Kalman update, a hit, and their descriptor
    /// appended; unmatched tentative tracks are deleted immediately, and any
    /// track unseen for more than `max_age` frames is deleted. Unmatched
    /// detections initiate fresh tentative tracks.
    pub fn step(&mut self, detections: &[Detection]) -> Result<Vec<TrackEvent>, TrackingError> {
        let mut events = Vec::new();

        for track in &mut self.tracks {
            track.state = self.filter.predict(&track.state);
            track.age += 1;
            track.frames_since_update += 1;
        }

        let association = associate(&self.filter, &self.config, &self.tracks, detections)?;

        for &(track_id, detection_index) in &association.matches {
            let detection = &detections[detection_index];
            let track = self
                .tracks
                .iter_mut()
                .find(|t| t.id == track_id)
                .expect("matched track id is live");
            track.state = self.filter.update(&track.state, &detection.measurement)?;
            track.hits += 1;
            track.frames_since_update = 0;
            if let Some(descriptor) = &detection.descriptor {
                track.push_descriptor(descriptor.clone(), self.config.gallery_capacity);
            }
            if track.status == TrackStatus::Tentative && track.hits >= self.config.confirm_hits {
                track.status = TrackStatus::Confirmed;
                events.push(TrackEvent::Confirmed(track.id));
            }
        }

        for &track_id in &association.unmatched_tracks {
            let track = self
                .tracks
                .iter_mut()
                .find(|t| t.id == track_id)
                .expect("unmatched track id is live");
            let expired = match track.status {
                // a miss while still tentative kills the hypothesis
                TrackStatus::Tentative => true,
                TrackStatus::Confirmed => track.frames_since_update > self.config.max_age,
                TrackStatus::Deleted => false,
            };
            if expired {
                track.status = TrackStatus::Deleted;
                events.push(TrackEvent::Deleted(track.id));
            }
        }
        self.tracks.retain(|t| t.status != TrackStatus::Deleted);

        for &detection_index in &association.unmatched_detections {
            let detection = &detections[detection_index];
            let mut track = Track {
                id: self.next_id,
                state: self.filter.initiate(&detection.measurement),
                status: TrackStatus::Tentative,
                hits: 1,
                frames_since_update: 0,
                age: 1,
                gallery: VecDeque::new(),
            };
            if let Some(descriptor) = &detection.descriptor {
                track.push_descriptor(descriptor.clone(), self.config.gallery_capacity);
            }
            if track.hits >= self.config.confirm_hits {
                track.status = TrackStatus::Confirmed;
            }
            events.push(TrackEvent::Created(track.id));
            self.next_id += 1;
            self.tracks.push(track);
        }

        Ok(events)
    }
}
