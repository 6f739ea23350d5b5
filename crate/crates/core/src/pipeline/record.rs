//! Line-delimited record schemas crossing the process boundary.
//!
//! The ingest format is the detector-agnostic contract: one JSON object per
//! line, UTF-8, with the exact field names below. Ground-truth files use the
//! same shape plus an identity label in place of confidence/descriptor.

use serde::{Deserialize, Serialize};

use crate::geometry::BoundingBox;

/// One detected person in one frame, as read from the detection stream.
///
/// `frame_id` must be non-decreasing across the stream and records for one
/// frame must be contiguous. The descriptor, when present, is an appearance
/// vector; it is normalized to unit length on ingest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub frame_id: u64,
    pub timestamp_ms: i64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub confidence: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub descriptor: Option<Vec<f64>>,
}

impl DetectionRecord {
    /// Checks the record invariants; returns a human-readable reason when
    /// the record must be skipped.
    pub fn validate(&self) -> Result<(), String> {
        BoundingBox::new(self.x, self.y, self.w, self.h)
            .map_err(|e| e.to_string())?;
        if !(0.0..=1.0).contains(&self.confidence) || !self.confidence.is_finite() {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        if let Some(descriptor) = &self.descriptor {
            if descriptor.len() < 2 {
                return Err(format!(
                    "descriptor dimension {} below 2",
                    descriptor.len()
                ));
            }
            let norm_sq: f64 = descriptor.iter().map(|v| v * v).sum();
            if !norm_sq.is_finite() || norm_sq <= 0.0 {
                return Err("descriptor has non-finite or zero norm".into());
            }
        }
        Ok(())
    }

    /// The record's box; call only after `validate`.
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox {
            x: self.x,
            y: self.y,
            w: self.w,
            h: self.h,
        }
    }
}

/// One annotated person in one frame of a ground-truth file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRecord {
    pub frame_id: u64,
    pub timestamp_ms: i64,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub identity: u64,
}

impl GroundTruthRecord {
    pub fn bbox(&self) -> BoundingBox {
        BoundingBox {
            x: self.x,
            y: self.y,
            w: self.w,
            h: self.h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn detection_record_round_trips_through_json() {
        let record = DetectionRecord {
            frame_id: 3,
            timestamp_ms: 99,
            x: 1.5,
            y: 2.5,
            w: 10.0,
            h: 20.0,
            confidence: 0.75,
            descriptor: Some(vec![0.6, 0.8]),
        };
        let line = serde_json::to_string(&record).unwrap();
        let back: DetectionRecord = serde_json::from_str(&line).unwrap();
        assert_eq!(back, record);
    }

    #[test]
    fn descriptor_field_is_optional() {
        let line = r#"{"frame_id":0,"timestamp_ms":0,"x":1.0,"y":2.0,"w":3.0,"h":4.0,"confidence":0.5}"#;
        let record: DetectionRecord = serde_json::from_str(line).unwrap();
        assert_eq!(record.descriptor, None);
        // absent descriptor also stays absent on write
        assert!(!serde_json::to_string(&record).unwrap().contains("descriptor"));
    }

    #[test]
    fn validation_rejects_bad_records() {
        let good = DetectionRecord {
            frame_id: 0,
            timestamp_ms: 0,
            x: 0.0,
            y: 0.0,
            w: 5.0,
            h: 5.0,
            confidence: 0.5,
            descriptor: None,
        };
        assert!(good.validate().is_ok());

        let mut bad = good.clone();
        bad.w = -1.0;
        assert!(bad.validate().is_err());

        let mut bad = good.clone();
        bad.confidence = 1.5;
        assert!(bad.validate().is_err());

        let mut bad = good.clone();
        bad.descriptor = Some(vec![0.0, 0.0]);
        assert!(bad.validate().is_err());

        let mut bad = good.clone();
        bad.descriptor = Some(vec![1.0]);
        assert!(bad.validate().is_err());

        let mut bad = good;
        bad.descriptor = Some(vec![f64::NAN, 0.0]);
        assert!(bad.validate().is_err());
    }
}
