//! Detection-quality metrics and the synthetic scenario generator used to
//! verify the engine end to end without real footage.

mod metrics;
mod scenario;

pub use metrics::{
    average_precision, match_detections, mean_average_precision, pr_curve, MatchCounts, PrPoint,
};
pub use scenario::{generate_scenario, Scenario, ScenarioConfig};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::BoundingBox;

#[derive(Debug, Error, PartialEq)]
pub enum EvaluationError {
    #[error("scenario config invalid: {0}")]
    InvalidScenario(String),
}

/// Annotated truth for one frame: boxes with identity labels, labels unique
/// within the frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub frame_id: u64,
    pub boxes: Vec<(BoundingBox, u64)>,
}
