//! Per-frame analytics records emitted by the pipeline.

use serde::{Deserialize, Serialize};

use crate::geometry::BoundingBox;
use crate::proximity::{SocialGroup, ViolationStats};
use crate::tracking::TrackStatus;

/// A live track as reported for one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSnapshot {
    pub id: u64,
    #[serde(flatten)]
    pub bbox: BoundingBox,
    pub status: TrackStatus,
}

/// Everything the engine knows about one frame: tracked people, social
/// groups, and violation statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub frame_id: u64,
    pub timestamp_ms: i64,
    pub tracks: Vec<TrackSnapshot>,
    pub groups: Vec<SocialGroup>,
    pub stats: ViolationStats,
    /// True iff at least one social group exists in this frame.
    pub violation: bool,
}

impl FrameReport {
    pub fn assemble(
        frame_id: u64,
        timestamp_ms: i64,
        tracks: Vec<TrackSnapshot>,
        groups: Vec<SocialGroup>,
        stats: ViolationStats,
    ) -> Self {
        Self {
            frame_id,
            timestamp_ms,
            tracks,
            groups,
            violation: stats.group_count >= 1,
            stats,
        }
    }
}

/// One entry in the violation event log; mirrors the report it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationEvent {
    pub frame_id: u64,
    pub timestamp_ms: i64,
    pub group_count: usize,
    pub people_count: usize,
    pub violation_index: f64,
}

impl ViolationEvent {
    /// The event for a violation report; `None` when the frame is clean.
    pub fn from_report(report: &FrameReport) -> Option<Self> {
        report.violation.then_some(Self {
            frame_id: report.frame_id,
            timestamp_ms: report.timestamp_ms,
            group_count: report.stats.group_count,
            people_count: report.stats.people_count,
            violation_index: report.stats.violation_index,
        })
    }
}

/// Per-person drawing instructions for one frame, for external renderers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayRecord {
    pub frame_id: u64,
    pub timestamp_ms: i64,
    pub entries: Vec<OverlayEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlayEntry {
    pub track_id: u64,
    #[serde(flatten)]
    pub bbox: BoundingBox,
    /// Color slot shared by all members of a group; null for ungrouped
    /// people.
    pub color: Option<u32>,
}

/// Flattens a report into overlay entries: every reported person with the
/// color of their group, if any.
pub fn emit_overlay(report: &FrameReport) -> OverlayRecord {
    let color_of = |track_id: u64| -> Option<u32> {
        report
            .groups
            .iter()
            .find(|g| g.members.contains(&track_id))
            .map(|g| g.color_index)
    };
    OverlayRecord {
        frame_id: report.frame_id,
        timestamp_ms: report.timestamp_ms,
        entries: report
            .tracks
            .iter()
            .map(|t| OverlayEntry {
                track_id: t.id,
                bbox: t.bbox,
                color: color_of(t.id),
            })
            .collect(),
    }
}
