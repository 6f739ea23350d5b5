//! Bounding-box primitives shared by detection ingest, tracking, proximity
//! analysis, and evaluation.
//!
//! Boxes live in continuous pixel coordinates as (left, top, width, height);
//! areas and overlaps use open-interval geometry (no +1 pixel correction).

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    #[error("bounding box must have positive finite dimensions and finite position (x={x}, y={y}, w={w}, h={h})")]
    InvalidBox { x: f64, y: f64, w: f64, h: f64 },
    #[error("anchor size must lie in (0, 1], got {0}")]
    InvalidAnchorSize(f64),
    #[error("anchor aspect ratio must be positive and finite, got {0}")]
    InvalidAnchorRatio(f64),
}

/// Axis-aligned pixel rectangle: the atom of detection and tracking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    /// Left edge in pixels.
    pub x: f64,
    /// Top edge in pixels.
    pub y: f64,
    /// Width in pixels, strictly positive.
    pub w: f64,
    /// Height in pixels, strictly positive.
    pub h: f64,
}

impl BoundingBox {
    /// Validating constructor; all fields must be finite and w, h > 0.
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self, GeometryError> {
        let finite = x.is_finite() && y.is_finite() && w.is_finite() && h.is_finite();
        if !finite || w <= 0.0 || h <= 0.0 {
            return Err(GeometryError::InvalidBox { x, y, w, h });
        }
        Ok(Self { x, y, w, h })
    }

    pub fn right(&self) -> f64 {
        self.x + self.w
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.h
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }
}

/// A detection candidate: box plus confidence score in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredBox {
    pub bbox: BoundingBox,
    pub score: f64,
}

/// A detection prior of relative size `size` and aspect ratio `ratio`,
/// instantiated at a specific image location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anchor {
    pub center_x: f64,
    pub center_y: f64,
    pub w: f64,
    pub h: f64,
    pub size: f64,
    pub ratio: f64,
}

/// Intersection over union of two boxes; symmetric, exactly 1 for identical
/// boxes, 0 for disjoint ones.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    // areas are derived from the same rounded corner coordinates as the
    // intersection, so iou(a, a) is exactly 1 even when x + w rounds
    let (ax2, ay2) = (a.right(), a.bottom());
    let (bx2, by2) = (b.right(), b.bottom());

    let left = a.x.max(b.x);
    let top = a.y.max(b.y);
    let right = ax2.min(bx2);
    let bottom = ay2.min(by2);

    let inter = (right - left).max(0.0) * (bottom - top).max(0.0);
    if inter <= 0.0 {
        return 0.0;
    }
    let area_a = (ax2 - a.x) * (ay2 - a.y);
    let area_b = (bx2 - b.x) * (by2 - b.y);
    inter / (area_a + area_b - inter)
}

/// Greedy non-max suppression.
///
/// Candidates are visited in descending score order (ties keep input order);
/// a candidate is kept iff its IoU with every kept box is below
/// `iou_threshold`. The result is ordered by descending score.
pub fn nms(candidates: &[ScoredBox], iou_threshold: f64) -> Vec<ScoredBox> {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        candidates[b]
            .score
            .partial_cmp(&candidates[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut kept: Vec<ScoredBox> = Vec::new();
    for idx in order {
        let candidate = candidates[idx];
        if kept
            .iter()
            .all(|k| iou(&k.bbox, &candidate.bbox) < iou_threshold)
        {
            kept.push(candidate);
        }
    }
    kept
}

/// Generates `|sizes| * |ratios|` anchors per location for an image of
/// dimensions `image_w` x `image_h`.
///
/// An anchor of size `p` and ratio `r` spans `image_w*p*sqrt(r)` by
/// `image_h*p*sqrt(r)` pixels. Locations are caller-supplied; no stride
/// heuristic is baked in.
pub fn generate_anchors(
    image_w: f64,
    image_h: f64,
    sizes: &[f64],
    ratios: &[f64],
    locations: &[(f64, f64)],
) -> Result<Vec<Anchor>, GeometryError> {
    for &p in sizes {
        if p <= 0.0 || p > 1.0 || !p.is_finite() {
            return Err(GeometryError::InvalidAnchorSize(p));
        }
    }
    for &r in ratios {
        if r <= 0.0 || !r.is_finite() {
            return Err(GeometryError::InvalidAnchorRatio(r));
        }
    }

    let mut anchors = Vec::with_capacity(locations.len() * sizes.len() * ratios.len());
    for &(cx, cy) in locations {
        for &p in sizes {
            for &r in ratios {
                let scale = p * r.sqrt();
                anchors.push(Anchor {
                    center_x: cx,
                    center_y: cy,
                    w: image_w * scale,
                    h: image_h * scale,
                    size: p,
                    ratio: r,
                });
            }
        }
    }
    Ok(anchors)
}

/// Center of a box: (x + w/2, y + h/2).
pub fn centroid(bbox: &BoundingBox) -> (f64, f64) {
    (bbox.x + bbox.w / 2.0, bbox.y + bbox.h / 2.0)
}

/// Monocular depth proxy derived from box dimensions, in model units.
///
/// Strictly decreasing in both w and h: larger (closer) people get smaller
/// depth values. The `w + h * 360.0` grouping is intentional (height
/// dominates the estimate); do not "fix" it to `(w + h) * 360`, and the
/// leading constant is exactly 3.14, not pi.
#[allow(clippy::approx_constant)]
pub fn depth_estimate(bbox: &BoundingBox) -> f64 {
    (2.0 * 3.14 * 180.0) / (bbox.w + bbox.h * 360.0) * 1000.0 + 3.0
}
