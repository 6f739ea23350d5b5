//! End-to-end orchestration: read a detection stream, track frame by frame,
//! run the proximity analysis on confirmed tracks, and emit reports,
//! violation events, and overlay data.
//!
//! Processing is strictly frame-ordered and fully deterministic: timestamps
//! come from the input records, never from the wall clock, so re-running the
//! same input with the same configuration reproduces the outputs byte for
//! byte.

mod config;
mod record;
mod report;
mod stream;

pub use config::{OutputConfig, PipelineConfig};
pub use record::{DetectionRecord, GroundTruthRecord};
pub use report::{
    emit_overlay, FrameReport, OverlayEntry, OverlayRecord, TrackSnapshot, ViolationEvent,
};
pub use stream::{parse_stream, DetectionStream, FrameBatch};

use std::io::{BufRead, Write};

use nalgebra::DVector;
use thiserror::Error;

use crate::proximity::{build_groups, feature_of, pairwise_l2, violation_stats, PersonFeature};
use crate::tracking::{Detection, Measurement, Tracker, TrackingError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input format error at line {line}: {reason}")]
    Format { line: usize, reason: String },
    #[error("analytics failed at frame {frame_id}: {source}")]
    Analytics {
        frame_id: u64,
        source: TrackingError,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Aggregate statistics over one run.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RunSummary {
    pub total_frames: u64,
    pub violation_frames: u64,
    /// Highest violation index seen; 0 when no frame had groups.
    pub max_violation_index: f64,
    /// Mean violation index over violation frames; 0 when there were none.
    pub mean_violation_index: f64,
    /// Input lines dropped during ingestion.
    pub skipped_lines: u64,
}

/// Full in-memory result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub reports: Vec<FrameReport>,
    pub events: Vec<ViolationEvent>,
    pub summary: RunSummary,
}

/// Runs the pipeline, invoking `sink` once per frame in frame order.
pub fn process<R, F>(
    config: &PipelineConfig,
    source: R,
    mut sink: F,
) -> Result<RunSummary, PipelineError>
where
    R: BufRead,
    F: FnMut(&FrameReport) -> Result<(), PipelineError>,
{
    config.validate()?;
    let mut tracker = Tracker::new(config.tracker);

    let mut stream = parse_stream(source);
    let mut violation_frames = 0_u64;
    let mut total_frames = 0_u64;
    let mut max_violation_index = 0.0_f64;
    let mut violation_index_sum = 0.0_f64;

    for batch in &mut stream {
        let report = process_batch(config, &mut tracker, &batch?)?;
        total_frames += 1;
        if report.violation {
            violation_frames += 1;
            violation_index_sum += report.stats.violation_index;
            max_violation_index = max_violation_index.max(report.stats.violation_index);
        }
        sink(&report)?;
    }

    let skipped = stream.skipped_lines();
    if skipped > 0 {
        log::warn!("ingestion skipped {skipped} malformed line(s)");
    }
    Ok(RunSummary {
        total_frames,
        violation_frames,
        max_violation_index,
        mean_violation_index: if violation_frames > 0 {
            violation_index_sum / violation_frames as f64
        } else {
            0.0
        },
        skipped_lines: skipped,
    })
}

/// Runs the pipeline and collects reports and events in memory.
pub fn run<R: BufRead>(config: &PipelineConfig, source: R) -> Result<RunOutput, PipelineError> {
    let mut reports = Vec::new();
    let mut events = Vec::new();
    let summary = process(config, source, |report| {
        if let Some(event) = ViolationEvent::from_report(report) {
            events.push(event);
        }
        reports.push(report.clone());
        Ok(())
    })?;
    Ok(RunOutput {
        reports,
        events,
        summary,
    })
}

/// Runs the pipeline streaming line-delimited JSON to the given writers:
/// one report per frame, one event per violation frame, and (optionally)
/// one overlay record per frame.
pub fn run_to_writers<R, W1, W2, W3>(
    config: &PipelineConfig,
    source: R,
    report_writer: &mut W1,
    events_writer: &mut W2,
    mut overlay_writer: Option<&mut W3>,
) -> Result<RunSummary, PipelineError>
where
    R: BufRead,
    W1: Write,
    W2: Write,
    W3: Write,
{
    process(config, source, |report| {
        write_json_line(report_writer, report)?;
        if let Some(event) = ViolationEvent::from_report(report) {
            write_json_line(events_writer, &event)?;
        }
        if let Some(w) = overlay_writer.as_deref_mut() {
            write_json_line(w, &emit_overlay(report))?;
        }
        Ok(())
    })
}

fn write_json_line<W: Write, T: serde::Serialize>(
    writer: &mut W,
    value: &T,
) -> Result<(), PipelineError> {
    serde_json::to_writer(&mut *writer, value)
        .map_err(|e| PipelineError::Io(std::io::Error::other(e)))?;
    writer.write_all(b"\n")?;
    Ok(())
}

fn process_batch(
    config: &PipelineConfig,
    tracker: &mut Tracker,
    batch: &FrameBatch,
) -> Result<FrameReport, PipelineError> {
    let detections: Vec<Detection> = batch
        .records
        .iter()
        .filter(|r| r.confidence >= config.confidence_threshold)
        .map(|r| {
            let measurement = Measurement::from_bbox(&r.bbox());
            match &r.descriptor {
                Some(raw) => {
                    let v = DVector::from_row_slice(raw);
                    let norm = v.norm();
                    Detection::with_descriptor(measurement, v / norm)
                }
                None => Detection::new(measurement),
            }
        })
        .collect();

    tracker.step(&detections).map_err(|e| PipelineError::Analytics {
        frame_id: batch.frame_id,
        source: e,
    })?;

    let snapshots: Vec<TrackSnapshot> = tracker
        .tracks()
        .iter()
        .map(|t| TrackSnapshot {
            id: t.id,
            bbox: t.bbox(),
            status: t.status,
        })
        .collect();

    // tentative tracks are reported but never grouped: detector flicker
    // must not inflate the violation index
    let features: Vec<PersonFeature> = tracker
        .tracks()
        .iter()
        .filter(|t| t.is_confirmed())
        .map(|t| feature_of(&t.bbox(), t.id))
        .collect();
    let matrix = pairwise_l2(&features, &config.proximity.scales);
    let groups = build_groups(&matrix, &features, config.frame_height, &config.proximity);
    let stats = violation_stats(&groups);

    Ok(FrameReport::assemble(
        batch.frame_id,
        batch.timestamp_ms,
        snapshots,
        groups,
        stats,
    ))
}
