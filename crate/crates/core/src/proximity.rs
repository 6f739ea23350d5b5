//! Per-frame social-distance analysis.
//!
//! Every confirmed person becomes a point in a three-dimensional feature
//! space (box centroid x, y plus a monocular depth proxy). Pairwise L2
//! distances over that space, compared against a closeness threshold that
//! grows toward the bottom of the frame (nearer to the camera), define a
//! proximity graph; its connected components of two or more people are the
//! social groups, and the violation index is the ratio of grouped people to
//! groups.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::geometry::{self, BoundingBox};

/// One person as a point in the (x, y, depth) feature space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersonFeature {
    pub track_id: u64,
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

/// Feature for a tracked person: centroid coordinates plus depth estimate.
pub fn feature_of(bbox: &BoundingBox, track_id: u64) -> PersonFeature {
    let (x, y) = geometry::centroid(bbox);
    PersonFeature {
        track_id,
        x,
        y,
        depth: geometry::depth_estimate(bbox),
    }
}

/// Optional per-axis scale factors applied before distance computation.
/// Defaults to 1 on every axis, i.e. raw pixel/depth units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxisScales {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
}

impl Default for AxisScales {
    fn default() -> Self {
        Self {
            x: 1.0,
            y: 1.0,
            depth: 1.0,
        }
    }
}

/// Dense symmetric matrix of pairwise L2 distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    values: DMatrix<f64>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.nrows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.values
    }
}

/// Pairwise L2 distances over the scaled (x, y, depth) feature space.
///
/// Computed with batched whole-matrix arithmetic: per-axis difference
/// matrices are formed by outer products with the all-ones vector, squared,
/// summed, and square-rooted componentwise. Entrywise this performs the exact
/// same floating-point operations as a scalar loop over pairs.
pub fn pairwise_l2(features: &[PersonFeature], scales: &AxisScales) -> DistanceMatrix {
    let n = features.len();
    let ones = DVector::from_element(n, 1.0);

    let axis_differences = |pick: fn(&PersonFeature) -> f64, scale: f64| -> DMatrix<f64> {
        let column = DVector::from_iterator(n, features.iter().map(|f| pick(f) * scale));
        &column * ones.transpose() - &ones * column.transpose()
    };

    let dx = axis_differences(|f| f.x, scales.x);
    let dy = axis_differences(|f| f.y, scales.y);
    let dd = axis_differences(|f| f.depth, scales.depth);

    let mut squared = dx.component_mul(&dx) + dy.component_mul(&dy) + dd.component_mul(&dd);
    squared.apply(|v| *v = v.sqrt());
    DistanceMatrix { values: squared }
}

/// Proximity analysis parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProximityConfig {
    /// Closeness threshold at the top of the frame (far field), pixels.
    pub threshold_min: f64,
    /// Closeness threshold at the bottom of the frame (near field), pixels.
    pub threshold_max: f64,
    pub scales: AxisScales,
}

impl Default for ProximityConfig {
    fn default() -> Self {
        Self {
            threshold_min: 90.0,
            threshold_max: 170.0,
            scales: AxisScales::default(),
        }
    }
}

impl ProximityConfig {
    /// Dynamic closeness threshold for a person whose centroid sits at
    /// vertical coordinate `y`: linear from `threshold_min` at the top of
    /// the frame to `threshold_max` at the bottom. `y` is clamped to the
    /// frame.
    pub fn closeness_threshold(&self, y: f64, frame_h: f64) -> f64 {
        let clamped = y.clamp(0.0, frame_h);
        self.threshold_min + (self.threshold_max - self.threshold_min) * (clamped / frame_h)
    }
}

/// A connected set of at least two people in close proximity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SocialGroup {
    /// Track ids of the members, ascending.
    pub members: Vec<u64>,
    /// Stable overlay color slot: groups are numbered by ascending smallest
    /// member id.
    pub color_index: u32,
}

/// Disjoint-set forest with path compression and union by rank.
struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            self.parent[x] = self.find(self.parent[x]);
        }
        self.parent[x]
    }

    fn union(&mut self, x: usize, y: usize) {
        let rx = self.find(x);
        let ry = self.find(y);
        if rx == ry {
            return;
        }
        if self.rank[rx] < self.rank[ry] {
            self.parent[rx] = ry;
        } else if self.rank[rx] > self.rank[ry] {
            self.parent[ry] = rx;
        } else {
            self.parent[ry] = rx;
            self.rank[rx] += 1;
        }
    }
}

/// Groups people whose pairwise distance falls below the closeness threshold.
///
/// An edge joins i and j iff `distance(i, j) < min(threshold_i, threshold_j)`
/// (strict); groups are the connected components with at least two members.
pub fn build_groups(
    matrix: &DistanceMatrix,
    features: &[PersonFeature],
    frame_h: f64,
    config: &ProximityConfig,
) -> Vec<SocialGroup> {
    let n = features.len();
    debug_assert_eq!(matrix.len(), n, "distance matrix inconsistent with features");

    let thresholds: Vec<f64> = features
        .iter()
        .map(|f| config.closeness_threshold(f.y, frame_h))
        .collect();

    let mut sets = UnionFind::new(n);
    for i in 0..n {
        for j in (i + 1)..n {
            if matrix.get(i, j) < thresholds[i].min(thresholds[j]) {
                sets.union(i, j);
            }
        }
    }

    let mut components: std::collections::HashMap<usize, Vec<u64>> =
        std::collections::HashMap::new();
    for (i, feature) in features.iter().enumerate() {
        components
            .entry(sets.find(i))
            .or_default()
            .push(feature.track_id);
    }

    let mut groups: Vec<Vec<u64>> = components
        .into_values()
        .filter(|members| members.len() >= 2)
        .collect();
    for members in &mut groups {
        members.sort_unstable();
    }
    groups.sort_by_key(|members| members[0]);

    groups
        .into_iter()
        .enumerate()
        .map(|(index, members)| SocialGroup {
            members,
            color_index: index as u32,
        })
        .collect()
}

/// Per-frame distancing-violation statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationStats {
    /// Number of social groups in the frame.
    pub group_count: usize,
    /// Total people in close proximity (sum of group sizes).
    pub people_count: usize,
    /// Ratio of people in proximity to groups; 0 when there are no groups.
    pub violation_index: f64,
    /// Violation index times the number of groups.
    pub estimated_violations: f64,
}

pub fn violation_stats(groups: &[SocialGroup]) -> ViolationStats {
    let group_count = groups.len();
    let people_count: usize = groups.iter().map(|g| g.members.len()).sum();
    let violation_index = if group_count > 0 {
        people_count as f64 / group_count as f64
    } else {
        0.0
    };
    ViolationStats {
        group_count,
        people_count,
        violation_index,
        estimated_violations: violation_index * group_count as f64,
    }
}
