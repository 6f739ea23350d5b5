//! Constant-velocity Kalman filter over the 8-dimensional track state
//! (center_x, center_y, aspect, height, and their per-frame velocities).
//!
//! The observation model is linear: the measurement (u, v, a, h) reads the
//! first four state components directly. Process and measurement noise scale
//! with the track's height, reflecting that pixel uncertainty grows with
//! apparent size.

use nalgebra::{Cholesky, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::geometry::BoundingBox;
use crate::tracking::TrackingError;

pub type StateMean = SVector<f64, 8>;
pub type StateCov = SMatrix<f64, 8, 8>;
pub type MeasurementVector = SVector<f64, 4>;
pub type MeasurementCov = SMatrix<f64, 4, 4>;

/// One observed person in measurement space: box centroid, aspect ratio
/// (w/h), and height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub center_x: f64,
    pub center_y: f64,
    pub aspect: f64,
    pub height: f64,
}

impl Measurement {
    pub fn new(center_x: f64, center_y: f64, aspect: f64, height: f64) -> Result<Self, TrackingError> {
        let finite = center_x.is_finite()
            && center_y.is_finite()
            && aspect.is_finite()
            && height.is_finite();
        if !finite || aspect <= 0.0 || height <= 0.0 {
            return Err(TrackingError::InvalidMeasurement {
                aspect,
                height,
            });
        }
        Ok(Self {
            center_x,
            center_y,
            aspect,
            height,
        })
    }

    /// Measurement from a bounding box: centroid, aspect = w/h, height = h.
    pub fn from_bbox(bbox: &BoundingBox) -> Self {
        let (cx, cy) = crate::geometry::centroid(bbox);
        Self {
            center_x: cx,
            center_y: cy,
            aspect: bbox.w / bbox.h,
            height: bbox.h,
        }
    }

    pub fn to_bbox(&self) -> BoundingBox {
        let w = self.aspect * self.height;
        BoundingBox {
            x: self.center_x - w / 2.0,
            y: self.center_y - self.height / 2.0,
            w,
            h: self.height,
        }
    }

    pub fn as_vector(&self) -> MeasurementVector {
        MeasurementVector::new(self.center_x, self.center_y, self.aspect, self.height)
    }
}

/// Gaussian state estimate: mean and covariance of the 8D track state.
#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: StateMean,
    pub covariance: StateCov,
}

impl KalmanState {
    /// The measurement-space part of the mean (u, v, a, h).
    pub fn measurement(&self) -> Measurement {
        Measurement {
            center_x: self.mean[0],
            center_y: self.mean[1],
            aspect: self.mean[2],
            height: self.mean[3],
        }
    }

    pub fn bbox(&self) -> BoundingBox {
        self.measurement().to_bbox()
    }
}

/// Noise configuration for the filter. All standard deviations that have a
/// pixel unit scale with the track height.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KalmanConfig {
    /// Process noise std per frame for positional components, as a fraction
    /// of track height.
    pub position_noise_weight: f64,
    /// Process noise std per frame for velocity components, as a fraction of
    /// track height.
    pub velocity_noise_weight: f64,
    /// Measurement noise std for positional components, as a fraction of
    /// track height. Lower it when detections are known to be precise.
    pub measurement_noise_weight: f64,
    /// Multiplier on the velocity noise weight for the initial velocity
    /// uncertainty of a fresh track.
    pub initial_velocity_scale: f64,
    /// Process noise std for the (unitless) aspect-ratio component.
    pub aspect_process_std: f64,
    /// Process noise std for the aspect-ratio velocity.
    pub aspect_velocity_std: f64,
    /// Measurement noise std for the aspect-ratio observation.
    pub aspect_measurement_std: f64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self {
            position_noise_weight: 1.0 / 20.0,
            velocity_noise_weight: 1.0 / 160.0,
            measurement_noise_weight: 1.0 / 20.0,
            initial_velocity_scale: 10.0,
            aspect_process_std: 1e-2,
            aspect_velocity_std: 1e-5,
            aspect_measurement_std: 1e-1,
        }
    }
}

/// Squared Mahalanobis distance of `observed` from the Gaussian
/// (`predicted`, `innovation_cov`).
///
/// Fails if the innovation covariance is not positive definite.
pub fn mahalanobis_squared(
    predicted: &MeasurementVector,
    innovation_cov: &MeasurementCov,
    observed: &MeasurementVector,
) -> Result<f64, TrackingError> {
    let chol = Cholesky::new(*innovation_cov).ok_or(TrackingError::SingularInnovation)?;
    let residual = observed - predicted;
    let solved = chol.solve(&residual);
    Ok(residual.dot(&solved))
}

#[derive(Debug, Clone)]
pub struct KalmanFilter {
    config: KalmanConfig,
    transition: StateCov,
    observation: SMatrix<f64, 4, 8>,
}

impl Default for KalmanFilter {
    fn default() -> Self {
        Self::new(KalmanConfig::default())
    }
}

impl KalmanFilter {
    pub fn new(config: KalmanConfig) -> Self {
        let mut transition = StateCov::identity();
        for i in 0..4 {
            transition[(i, i + 4)] = 1.0;
        }
        let mut observation = SMatrix::<f64, 4, 8>::zeros();
        for i in 0..4 {
            observation[(i, i)] = 1.0;
        }
        Self {
            config,
            transition,
            observation,
        }
    }

    pub fn config(&self) -> &KalmanConfig {
        &self.config
    }

    /// New track state from an unassociated measurement: zero velocity,
    /// diagonal covariance scaled by the measured height.
    pub fn initiate(&self, m: &Measurement) -> KalmanState {
        let mut mean = StateMean::zeros();
        mean.fixed_rows_mut::<4>(0).copy_from(&m.as_vector());

        let c = &self.config;
        let h = m.height;
        let std = [
            2.0 * c.position_noise_weight * h,
            2.0 * c.position_noise_weight * h,
            c.aspect_process_std,
            2.0 * c.position_noise_weight * h,
            c.initial_velocity_scale * c.velocity_noise_weight * h,
            c.initial_velocity_scale * c.velocity_noise_weight * h,
            c.aspect_velocity_std,
            c.initial_velocity_scale * c.velocity_noise_weight * h,
        ];
        let mut covariance = StateCov::zeros();
        for (i, s) in std.iter().enumerate() {
            covariance[(i, i)] = s * s;
        }
        KalmanState { mean, covariance }
    }

    fn process_noise(&self, height: f64) -> StateCov {
        let c = &self.config;
        let std = [
            c.position_noise_weight * height,
            c.position_noise_weight * height,
            c.aspect_process_std,
            c.position_noise_weight * height,
            c.velocity_noise_weight * height,
            c.velocity_noise_weight * height,
            c.aspect_velocity_std,
            c.velocity_noise_weight * height,
        ];
        let mut q = StateCov::zeros();
        for (i, s) in std.iter().enumerate() {
            q[(i, i)] = s * s;
        }
        q
    }

    fn measurement_noise(&self, height: f64) -> MeasurementCov {
        let c = &self.config;
        let std = [
            c.measurement_noise_weight * height,
            c.measurement_noise_weight * height,
            c.aspect_measurement_std,
            c.measurement_noise_weight * height,
        ];
        let mut r = MeasurementCov::zeros();
        for (i, s) in std.iter().enumerate() {
            r[(i, i)] = s * s;
        }
        r
    }

    /// One constant-velocity step: positions advance by their velocities and
    /// the covariance inflates by the process noise.
    pub fn predict(&self, state: &KalmanState) -> KalmanState {
        let mean = self.transition * state.mean;
        let covariance = self.transition * state.covariance * self.transition.transpose()
            + self.process_noise(state.mean[3]);
        KalmanState {
            mean,
            covariance: symmetrize(covariance),
        }
    }

    /// Projects the state into measurement space: the predicted measurement
    /// and its innovation covariance S = H P Ht + R.
    pub fn project(&self, state: &KalmanState) -> (MeasurementVector, MeasurementCov) {
        let mean = self.observation * state.mean;
        let cov = self.observation * state.covariance * self.observation.transpose()
            + self.measurement_noise(state.mean[3]);
        (mean, cov)
    }

    /// Measurement update in Joseph form, which preserves covariance symmetry
    /// and positive semidefiniteness.
    pub fn update(&self, state: &KalmanState, m: &Measurement) -> Result<KalmanState, TrackingError> {
        let (projected, innovation_cov) = self.project(state);
        let chol =
            Cholesky::new(innovation_cov).ok_or(TrackingError::SingularInnovation)?;

        // gain K = P Ht S^-1, computed as (S^-1 H P)^T since P is symmetric
        let hp = self.observation * state.covariance;
        let gain = chol.solve(&hp).transpose();

        let innovation = m.as_vector() - projected;
        let mean = state.mean + gain * innovation;

        let i_kh = StateCov::identity() - gain * self.observation;
        let r = self.measurement_noise(state.mean[3]);
        let covariance =
            i_kh * state.covariance * i_kh.transpose() + gain * r * gain.transpose();

        Ok(KalmanState {
            mean,
            covariance: symmetrize(covariance),
        })
    }

    /// Squared Mahalanobis distance between the state's predicted measurement
    /// distribution and an observed measurement.
    pub fn mahalanobis(&self, state: &KalmanState, m: &Measurement) -> Result<f64, TrackingError> {
        let (projected, innovation_cov) = self.project(state);
        mahalanobis_squared(&projected, &innovation_cov, &m.as_vector())
    }
}

fn symmetrize(m: StateCov) -> StateCov {
    (m + m.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn meas(u: f64, v: f64, a: f64, h: f64) -> Measurement {
        Measurement::new(u, v, a, h).unwrap()
    }

    fn assert_valid_covariance(cov: &StateCov) {
        for i in 0..8 {
            for j in 0..8 {
                assert_abs_diff_eq!(cov[(i, j)], cov[(j, i)], epsilon = 1e-9);
            }
        }
        let eig = cov.symmetric_eigenvalues();
        for v in eig.iter() {
            assert!(*v >= -1e-9, "covariance eigenvalue {v} below tolerance");
        }
    }

    #[test]
    fn initiate_zero_velocity_and_positive_diagonal() {
        let kf = KalmanFilter::default();
        let state = kf.initiate(&meas(100.0, 200.0, 0.5, 50.0));
        assert_eq!(
            state.mean.as_slice(),
            &[100.0, 200.0, 0.5, 50.0, 0.0, 0.0, 0.0, 0.0]
        );
        for i in 0..8 {
            assert!(state.covariance[(i, i)] > 0.0);
        }
        assert_valid_covariance(&state.covariance);
        // determinism
        assert_eq!(state, kf.initiate(&meas(100.0, 200.0, 0.5, 50.0)));
    }

    #[test]
    fn predict_advances_by_velocity() {
        let kf = KalmanFilter::default();
        let mut state = kf.initiate(&meas(0.0, 0.0, 1.0, 10.0));
        state.mean[4] = 2.0;
        state.mean[5] = 3.0;
        let next = kf.predict(&state);
        assert_eq!(next.mean[0], 2.0);
        assert_eq!(next.mean[1], 3.0);
        assert_eq!(next.mean[2], 1.0);
        assert_eq!(next.mean[3], 10.0);
        assert_valid_covariance(&next.covariance);
    }

    #[test]
    fn predict_zero_velocity_is_stationary() {
        let kf = KalmanFilter::default();
        let state = kf.initiate(&meas(40.0, 60.0, 0.4, 120.0));
        let next = kf.predict(&state);
        assert_eq!(next.mean.fixed_rows::<4>(0), state.mean.fixed_rows::<4>(0));
    }

    #[test]
    fn predict_inflates_covariance_trace() {
        let kf = KalmanFilter::default();
        let state = kf.initiate(&meas(40.0, 60.0, 0.4, 120.0));
        let next = kf.predict(&state);
        assert!(next.covariance.trace() >= state.covariance.trace());
    }

    #[test]
    fn update_with_predicted_mean_is_identity_on_position() {
        let kf = KalmanFilter::default();
        let state = kf.predict(&kf.initiate(&meas(10.0, 20.0, 0.5, 80.0)));
        let updated = kf.update(&state, &state.measurement()).unwrap();
        // zero innovation: mean unchanged
        assert_relative_eq!(updated.mean, state.mean, epsilon = 1e-12);
        assert_valid_covariance(&updated.covariance);
    }

    #[test]
    fn update_shrinks_position_variance() {
        let kf = KalmanFilter::default();
        let state = kf.predict(&kf.initiate(&meas(10.0, 20.0, 0.5, 80.0)));
        let updated = kf.update(&state, &meas(11.0, 19.0, 0.5, 80.0)).unwrap();
        assert!(updated.covariance[(0, 0)] < state.covariance[(0, 0)]);
        assert!(updated.covariance[(1, 1)] < state.covariance[(1, 1)]);
    }

    #[test]
    fn repeated_updates_converge_to_constant_measurement() {
        // fixed point of the recursion: predict/update cycles against a
        // constant measurement pull the measurement-space mean onto it;
        // the steady-state gain contracts the error by ~0.86 per cycle
        let kf = KalmanFilter::default();
        let target = meas(300.0, 400.0, 0.6, 90.0);
        let mut state = kf.initiate(&meas(250.0, 500.0, 0.9, 70.0));
        for _ in 0..100 {
            state = kf.predict(&state);
            state = kf.update(&state, &target).unwrap();
        }
        assert_abs_diff_eq!(state.mean[0], target.center_x, epsilon = 1e-3);
        assert_abs_diff_eq!(state.mean[1], target.center_y, epsilon = 1e-3);
        // the aspect component has by far the weakest gain (~0.9992
        // contraction per cycle) and needs a much longer horizon
        for _ in 0..20_000 {
            state = kf.predict(&state);
            state = kf.update(&state, &target).unwrap();
        }
        assert_abs_diff_eq!(state.mean[0], target.center_x, epsilon = 1e-9);
        assert_abs_diff_eq!(state.mean[1], target.center_y, epsilon = 1e-9);
        assert_abs_diff_eq!(state.mean[2], target.aspect, epsilon = 1e-9);
        assert_abs_diff_eq!(state.mean[3], target.height, epsilon = 1e-9);
        assert!(state.mean[3] > 0.0);
        assert_valid_covariance(&state.covariance);
    }

    #[test]
    fn mahalanobis_zero_for_projected_mean() {
        let kf = KalmanFilter::default();
        let state = kf.predict(&kf.initiate(&meas(10.0, 20.0, 0.5, 80.0)));
        let d = kf.mahalanobis(&state, &state.measurement()).unwrap();
        assert_abs_diff_eq!(d, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mahalanobis_quadratic_form_values() {
        let predicted = MeasurementVector::zeros();

        // identity covariance, unit residual
        let s = MeasurementCov::identity();
        let z = MeasurementVector::new(1.0, 0.0, 0.0, 0.0);
        assert_relative_eq!(
            mahalanobis_squared(&predicted, &s, &z).unwrap(),
            1.0,
            max_relative = 1e-12
        );

        // diag(4,1,1,1) with residual (2,0,0,0): 2^2 / 4 = 1
        let mut s = MeasurementCov::identity();
        s[(0, 0)] = 4.0;
        let z = MeasurementVector::new(2.0, 0.0, 0.0, 0.0);
        assert_relative_eq!(
            mahalanobis_squared(&predicted, &s, &z).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn mahalanobis_singular_covariance_is_an_error() {
        let predicted = MeasurementVector::zeros();
        let s = MeasurementCov::zeros();
        let z = MeasurementVector::new(1.0, 0.0, 0.0, 0.0);
        assert!(matches!(
            mahalanobis_squared(&predicted, &s, &z),
            Err(TrackingError::SingularInnovation)
        ));
    }

    #[test]
    fn measurement_bbox_round_trip() {
        let b = BoundingBox::new(10.0, 20.0, 30.0, 60.0).unwrap();
        let m = Measurement::from_bbox(&b);
        assert_eq!(m.center_x, 25.0);
        assert_eq!(m.center_y, 50.0);
        assert_eq!(m.aspect, 0.5);
        assert_eq!(m.height, 60.0);
        let back = m.to_bbox();
        assert_relative_eq!(back.x, b.x, epsilon = 1e-12);
        assert_relative_eq!(back.y, b.y, epsilon = 1e-12);
        assert_relative_eq!(back.w, b.w, epsilon = 1e-12);
        assert_relative_eq!(back.h, b.h, epsilon = 1e-12);
    }

    #[test]
    fn measurement_rejects_degenerate_values() {
        assert!(Measurement::new(0.0, 0.0, 0.0, 10.0).is_err());
        assert!(Measurement::new(0.0, 0.0, 0.5, -1.0).is_err());
        assert!(Measurement::new(f64::NAN, 0.0, 0.5, 10.0).is_err());
    }
}
