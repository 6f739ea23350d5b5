//! Detection-agnostic engine for monitoring social distancing in surveillance
//! footage.
//!
//! The engine consumes per-frame person detections (bounding boxes with
//! confidence scores and optional appearance descriptors) and produces tracked
//! identities, social-proximity groups, and per-frame violation statistics.
//! It deliberately contains no detector and no video decoding: detections come
//! in as line-delimited records, analytics go out the same way, so any
//! detector and any renderer can sit on either side.
//!
//! Module map:
//!
//! - [`geometry`] — bounding-box primitives: IoU, non-max suppression, anchor
//!   generation, centroid and depth estimation.
//! - [`tracking`] — tracking-by-detection: constant-velocity Kalman filter,
//!   gated Mahalanobis + cosine association costs, Hungarian assignment, and
//!   track lifecycle management.
//! - [`proximity`] — per-frame social-distance analysis: pairwise L2 distances
//!   over an (x, y, depth) feature space, dynamic closeness thresholds, group
//!   formation, and the violation index.
//! - [`epidemic`] — SIR model with distancing-awareness terms and a fixed-step
//!   RK4 integrator, for studying the effect distancing has on the infection
//!   peak.
//! - [`evaluation`] — detection-quality metrics (greedy IoU matching,
//!   precision/recall, AP/mAP) and a synthetic scenario generator used for
//!   end-to-end verification without real footage.
//! - [`pipeline`] — orchestration: configuration, stream ingestion,
//!   frame-ordered processing, and report/event/overlay emission.

pub mod epidemic;
pub mod evaluation;
pub mod geometry;
pub mod pipeline;
pub mod proximity;
pub mod tracking;
