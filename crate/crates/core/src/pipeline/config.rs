//! Pipeline configuration, loaded from TOML.
//!
//! Every section rejects unknown keys so typos fail loudly instead of
//! silently running with defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::pipeline::PipelineError;
use crate::proximity::ProximityConfig;
use crate::tracking::TrackerConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Frame width in pixels; used only for sanity context in overlays.
    pub frame_width: f64,
    /// Frame height in pixels; anchors the dynamic closeness threshold.
    pub frame_height: f64,
    /// Detections below this confidence are dropped before tracking.
    pub confidence_threshold: f64,
    pub tracker: TrackerConfig,
    pub proximity: ProximityConfig,
    pub output: OutputConfig,
}

/// Default output locations; command-line flags override these.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub report_path: Option<PathBuf>,
    pub events_path: Option<PathBuf>,
    pub overlay_path: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            frame_width: 1920.0,
            frame_height: 1080.0,
            confidence_threshold: 0.5,
            tracker: TrackerConfig::default(),
            proximity: ProximityConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(raw: &str) -> Result<Self, PipelineError> {
        let config: PipelineConfig =
            toml::from_str(raw).map_err(|e| PipelineError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let raw = std::fs::read_to_string(path).map_err(|e| {
            PipelineError::Config(format!("cannot read {}: {e}", path.display()))
        })?;
        Self::from_toml_str(&raw)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let mut problems = Vec::new();
        if !(self.frame_width > 0.0 && self.frame_height > 0.0) {
            problems.push("frame dimensions must be positive".to_string());
        }
        if !(0.0..=1.0).contains(&self.confidence_threshold) {
            problems.push(format!(
                "confidence_threshold {} outside [0, 1]",
                self.confidence_threshold
            ));
        }
        if self.tracker.motion_gate <= 0.0 || self.tracker.appearance_gate <= 0.0 {
            problems.push("tracker gates must be positive".to_string());
        }
        if let Some(w) = self.tracker.motion_weight {
            if !(0.0..=1.0).contains(&w) {
                problems.push(format!("tracker.motion_weight {w} outside [0, 1]"));
            }
        }
        if self.tracker.confirm_hits == 0 {
            problems.push("tracker.confirm_hits must be at least 1".to_string());
        }
        if self.tracker.gallery_capacity == 0 {
            problems.push("tracker.gallery_capacity must be at least 1".to_string());
        }
        let k = &self.tracker.kalman;
        if k.position_noise_weight <= 0.0
            || k.velocity_noise_weight <= 0.0
            || k.measurement_noise_weight <= 0.0
        {
            problems.push("kalman noise weights must be positive".to_string());
        }
        let p = &self.proximity;
        if !(p.threshold_min > 0.0 && p.threshold_max >= p.threshold_min) {
            problems.push(format!(
                "proximity thresholds invalid (min {}, max {})",
                p.threshold_min, p.threshold_max
            ));
        }
        if p.scales.x <= 0.0 || p.scales.y <= 0.0 || p.scales.depth < 0.0 {
            problems.push("proximity axis scales must be positive (depth may be 0)".to_string());
        }

        if problems.is_empty() {
            Ok(())
        } else {
            Err(PipelineError::Config(problems.join("; ")))
        }
    }
}
