//! Greedy IoU matching, precision/recall curves, and average precision.

use crate::geometry::{iou, BoundingBox, ScoredBox};

/// Outcome of matching one frame of predictions against ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MatchCounts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

/// One point on a precision/recall curve, tagged with the score threshold
/// that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrPoint {
    pub precision: f64,
    pub recall: f64,
    pub score_threshold: f64,
}

/// Greedy matching in descending score order.
///
/// Each prediction grabs its highest-IoU truth box among those not yet
/// consumed; the prediction is a true positive iff that IoU reaches
/// `iou_threshold`. Each truth box is consumed at most once.
pub fn match_detections(
    predictions: &[ScoredBox],
    truth: &[BoundingBox],
    iou_threshold: f64,
) -> MatchCounts {
    let mut order: Vec<usize> = (0..predictions.len()).collect();
    order.sort_by(|&a, &b| {
        predictions[b]
            .score
            .partial_cmp(&predictions[a].score)
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let mut consumed = vec![false; truth.len()];
    let mut true_positives = 0;
    for idx in order {
        if best_unconsumed_match(&predictions[idx].bbox, truth, &consumed, iou_threshold)
            .map(|best| consumed[best] = true)
            .is_some()
        {
            true_positives += 1;
        }
    }
    MatchCounts {
        true_positives,
        false_positives: predictions.len() - true_positives,
        false_negatives: truth.len() - true_positives,
    }
}

fn best_unconsumed_match(
    prediction: &BoundingBox,
    truth: &[BoundingBox],
    consumed: &[bool],
    iou_threshold: f64,
) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (ti, t) in truth.iter().enumerate() {
        if consumed[ti] {
            continue;
        }
        let overlap = iou(prediction, t);
        if best.is_none_or(|(_, b)| overlap > b) {
            best = Some((ti, overlap));
        }
    }
    best.filter(|&(_, overlap)| overlap >= iou_threshold)
        .map(|(ti, _)| ti)
}

/// Precision/recall curve for a single class over many frames.
///
/// Predictions across all frames are swept in descending score order; each
/// one is matched greedily within its own frame under the single-consumption
/// rule, and every prediction contributes one cumulative curve point.
pub fn pr_curve(frames: &[(Vec<ScoredBox>, Vec<BoundingBox>)], iou_threshold: f64) -> Vec<PrPoint> {
    let total_truth: usize = frames.iter().map(|(_, t)| t.len()).sum();

    let mut flat: Vec<(usize, usize, f64)> = frames
        .iter()
        .enumerate()
        .flat_map(|(fi, (predictions, _))| {
            predictions
                .iter()
                .enumerate()
                .map(move |(pi, p)| (fi, pi, p.score))
        })
        .collect();
    flat.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap_or(std::cmp::Ordering::Equal));

    let mut consumed: Vec<Vec<bool>> = frames.iter().map(|(_, t)| vec![false; t.len()]).collect();
    let mut points = Vec::with_capacity(flat.len());
    let mut true_positives = 0_usize;
    let mut seen = 0_usize;
    for (fi, pi, score) in flat {
        let (predictions, truth) = &frames[fi];
        seen += 1;
        if let Some(best) = best_unconsumed_match(
            &predictions[pi].bbox,
            truth,
            &consumed[fi],
            iou_threshold,
        ) {
            consumed[fi][best] = true;
            true_positives += 1;
        }
        points.push(PrPoint {
            precision: true_positives as f64 / seen as f64,
            recall: if total_truth > 0 {
                true_positives as f64 / total_truth as f64
            } else {
                0.0
            },
            score_threshold: score,
        });
    }
    points
}

/// Area under the precision/recall curve with all-points interpolation: the
/// precision envelope is made monotone non-increasing before integrating
/// over recall.
pub fn average_precision(points: &[PrPoint]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }

    // envelope[i] = max precision at recall >= recall[i]
    let mut envelope = vec![0.0; points.len()];
    let mut running = 0.0_f64;
    for (i, point) in points.iter().enumerate().rev() {
        running = running.max(point.precision);
        envelope[i] = running;
    }

    let mut area = 0.0;
    let mut previous_recall = 0.0;
    for (point, &precision) in points.iter().zip(&envelope) {
        area += (point.recall - previous_recall) * precision;
        previous_recall = point.recall;
    }
    area
}

/// Mean of per-class average precisions; degenerates to plain AP for a
/// single class.
pub fn mean_average_precision(per_class_curves: &[Vec<PrPoint>]) -> f64 {
    if per_class_curves.is_empty() {
        return 0.0;
    }
    per_class_curves
        .iter()
        .map(|curve| average_precision(curve))
        .sum::<f64>()
        / per_class_curves.len() as f64
}
