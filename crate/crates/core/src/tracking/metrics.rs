//! Association metrics: appearance (cosine) distance and the joint gate that
//! combines motion and appearance costs.

use nalgebra::DVector;

use crate::tracking::TrackingError;

/// 95% chi-square quantile for 4 degrees of freedom — the conventional gate
/// for a squared Mahalanobis distance over a 4-dimensional measurement.
pub const MAHALANOBIS_GATE_95: f64 = 9.4877;

/// Smallest cosine distance between a track's descriptor gallery and a
/// detection descriptor: `min_k (1 - r . g_k)`, in [0, 2] for unit vectors.
///
/// The gallery must be non-empty and all vectors must share the descriptor
/// dimension.
pub fn cosine_distance<'a, I>(gallery: I, descriptor: &DVector<f64>) -> Result<f64, TrackingError>
where
    I: IntoIterator<Item = &'a DVector<f64>>,
{
    let mut best: Option<f64> = None;
    for sample in gallery {
        if sample.len() != descriptor.len() {
            return Err(TrackingError::DescriptorDimension {
                expected: sample.len(),
                got: descriptor.len(),
            });
        }
        let d = 1.0 - descriptor.dot(sample);
        best = Some(match best {
            Some(b) if b <= d => b,
            _ => d,
        });
    }
    best.ok_or(TrackingError::EmptyGallery)
}

/// Gated association cost for one track-detection pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationCost {
    /// Squared Mahalanobis distance in measurement space.
    pub motion: f64,
    /// Smallest cosine distance against the appearance gallery.
    pub appearance: f64,
    /// `motion_weight * motion + (1 - motion_weight) * appearance`.
    pub combined: f64,
    /// True iff the pair is inside the gating region of both metrics.
    pub admissible: bool,
}

/// Combines the two distances with a weighted sum and applies both gates.
///
/// Gating is strict: a distance exactly equal to its gate is inadmissible.
pub fn gate_and_cost(
    motion: f64,
    appearance: f64,
    motion_gate: f64,
    appearance_gate: f64,
    motion_weight: f64,
) -> AssociationCost {
    AssociationCost {
        motion,
        appearance,
        combined: motion_weight * motion + (1.0 - motion_weight) * appearance,
        admissible: motion < motion_gate && appearance < appearance_gate,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(components: &[f64]) -> DVector<f64> {
        let v = DVector::from_row_slice(components);
        let n = v.norm();
        v / n
    }

    #[test]
    fn cosine_zero_for_identical_vector() {
        let r = unit(&[0.3, -0.5, 0.8, 0.1]);
        let gallery = vec![unit(&[1.0, 0.0, 0.0, 0.0]), r.clone()];
        let d = cosine_distance(&gallery, &r).unwrap();
        assert_relative_eq!(d, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn cosine_two_for_antipodal() {
        let r = unit(&[0.0, 1.0, 0.0, 0.0]);
        let gallery = vec![-r.clone()];
        assert_relative_eq!(cosine_distance(&gallery, &r).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn cosine_min_over_gallery() {
        let e1 = unit(&[1.0, 0.0, 0.0, 0.0]);
        let e2 = unit(&[0.0, 1.0, 0.0, 0.0]);
        let r = unit(&[1.0, 1.0, 0.0, 0.0]); // (sqrt(1/2), sqrt(1/2), 0, 0)
        let d = cosine_distance([&e1, &e2], &r).unwrap();
        assert_relative_eq!(d, 1.0 - 0.5_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn cosine_empty_gallery_is_an_error() {
        let r = unit(&[1.0, 0.0]);
        assert!(matches!(
            cosine_distance(&[], &r),
            Err(TrackingError::EmptyGallery)
        ));
    }

    #[test]
    fn cosine_dimension_mismatch_is_an_error() {
        let r = unit(&[1.0, 0.0]);
        let gallery = vec![unit(&[1.0, 0.0, 0.0])];
        assert!(matches!(
            cosine_distance(&gallery, &r),
            Err(TrackingError::DescriptorDimension {
                expected: 3,
                got: 2
            })
        ));
    }

    #[test]
    fn gate_zero_distances_admissible() {
        let c = gate_and_cost(0.0, 0.0, 9.4877, 0.2, 0.5);
        assert!(c.admissible);
        assert_eq!(c.combined, 0.0);
    }

    #[test]
    fn gate_is_strict() {
        let c = gate_and_cost(9.4877, 0.0, 9.4877, 0.2, 0.5);
        assert!(!c.admissible);
        let c = gate_and_cost(0.0, 0.2, 9.4877, 0.2, 0.5);
        assert!(!c.admissible);
        let c = gate_and_cost(9.4876, 0.19, 9.4877, 0.2, 0.5);
        assert!(c.admissible);
    }

    #[test]
    fn combined_is_weighted_sum() {
        let c = gate_and_cost(2.0, 0.4, 10.0, 1.0, 0.5);
        assert_relative_eq!(c.combined, 1.2, epsilon = 1e-12);
        let c = gate_and_cost(2.0, 0.4, 10.0, 1.0, 0.0);
        assert_relative_eq!(c.combined, 0.4, epsilon = 1e-12);
        let c = gate_and_cost(2.0, 0.4, 10.0, 1.0, 1.0);
        assert_relative_eq!(c.combined, 2.0, epsilon = 1e-12);
    }
}
