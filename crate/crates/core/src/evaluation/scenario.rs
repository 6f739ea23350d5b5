//! Seeded synthetic scenarios: constant-velocity pedestrians with reflective
//! frame boundaries, plus a configurable detection channel (coordinate noise,
//! misses, false positives, noisy appearance descriptors).
//!
//! Generation is fully deterministic for a given config: one ChaCha stream,
//! fixed draw order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::evaluation::{EvaluationError, GroundTruthFrame};
use crate::geometry::BoundingBox;
use crate::pipeline::{DetectionRecord, GroundTruthRecord};

/// Milliseconds between consecutive synthetic frames (a 25 fps stream).
pub const FRAME_INTERVAL_MS: i64 = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub frame_width: f64,
    pub frame_height: f64,
    pub person_count: usize,
    pub frame_count: usize,
    /// Per-axis speed is drawn uniformly from [-max_speed, max_speed]
    /// pixels/frame.
    pub max_speed: f64,
    /// Gaussian noise std added to each detection coordinate, pixels.
    pub detection_noise_std: f64,
    /// Probability that a true person produces no detection in a frame.
    pub miss_rate: f64,
    /// Expected number of spurious detections per frame (Poisson).
    pub false_positive_rate: f64,
    /// Dimension of the per-identity appearance descriptors.
    pub descriptor_dim: usize,
    /// Gaussian noise std added per descriptor component before
    /// re-normalization.
    pub descriptor_noise_std: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frame_width: 1920.0,
            frame_height: 1080.0,
            person_count: 8,
            frame_count: 200,
            max_speed: 4.0,
            detection_noise_std: 0.0,
            miss_rate: 0.0,
            false_positive_rate: 0.0,
            descriptor_dim: 8,
            descriptor_noise_std: 0.0,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), EvaluationError> {
        let mut problems = Vec::new();
        if !(self.frame_width > 0.0 && self.frame_height > 0.0) {
            problems.push("frame dimensions must be positive".to_string());
        }
        if !(0.0..1.0).contains(&self.miss_rate) {
            problems.push(format!("miss_rate {} outside [0, 1)", self.miss_rate));
        }
        if self.false_positive_rate < 0.0 {
            problems.push(format!(
                "false_positive_rate {} negative",
                self.false_positive_rate
            ));
        }
        if self.detection_noise_std < 0.0 || self.descriptor_noise_std < 0.0 {
            problems.push("noise stds must be non-negative".to_string());
        }
        if self.descriptor_dim < 2 {
            problems.push(format!("descriptor_dim {} below 2", self.descriptor_dim));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(EvaluationError::InvalidScenario(problems.join("; ")))
        }
    }
}

/// Generated ground truth and the matching detection stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub truth: Vec<GroundTruthFrame>,
    pub detections: Vec<DetectionRecord>,
}

impl Scenario {
    /// Ground truth flattened to line-delimited records.
    pub fn truth_records(&self) -> Vec<GroundTruthRecord> {
        self.truth
            .iter()
            .flat_map(|frame| {
                frame.boxes.iter().map(|(bbox, identity)| GroundTruthRecord {
                    frame_id: frame.frame_id,
                    timestamp_ms: frame.frame_id as i64 * FRAME_INTERVAL_MS,
                    x: bbox.x,
                    y: bbox.y,
                    w: bbox.w,
                    h: bbox.h,
                    identity: *identity,
                })
            })
            .collect()
    }
}

struct Person {
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    w: f64,
    h: f64,
    descriptor: Vec<f64>,
}

/// Runs the simulation and the detection channel.
pub fn generate_scenario(config: &ScenarioConfig) -> Result<Scenario, EvaluationError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut people: Vec<Person> = (0..config.person_count)
        .map(|_| {
            let w = rng.random_range(30.0..60.0);
            let h = rng.random_range(80.0..160.0);
            Person {
                x: rng.random_range(0.0..(config.frame_width - w)),
                y: rng.random_range(0.0..(config.frame_height - h)),
                vx: rng.random_range(-config.max_speed..=config.max_speed),
                vy: rng.random_range(-config.max_speed..=config.max_speed),
                w,
                h,
                descriptor: random_unit_vector(&mut rng, config.descriptor_dim),
            }
        })
        .collect();

    let coordinate_noise = if config.detection_noise_std > 0.0 {
        Some(Normal::new(0.0, config.detection_noise_std).expect("std validated"))
    } else {
        None
    };
    let descriptor_noise = if config.descriptor_noise_std > 0.0 {
        Some(Normal::new(0.0, config.descriptor_noise_std).expect("std validated"))
    } else {
        None
    };
    let false_positives = if config.false_positive_rate > 0.0 {
        Some(Poisson::new(config.false_positive_rate).expect("rate validated"))
    } else {
        None
    };

    let mut truth = Vec::with_capacity(config.frame_count);
    let mut detections = Vec::new();

    for frame_id in 0..config.frame_count as u64 {
        let timestamp_ms = frame_id as i64 * FRAME_INTERVAL_MS;

        if frame_id > 0 {
            for person in &mut people {
                advance(person, config.frame_width, config.frame_height);
            }
        }

        let boxes: Vec<(BoundingBox, u64)> = people
            .iter()
            .enumerate()
            .map(|(identity, p)| {
                (
                    BoundingBox {
                        x: p.x,
                        y: p.y,
                        w: p.w,
                        h: p.h,
                    },
                    identity as u64,
                )
            })
            .collect();

        for (identity, person) in people.iter().enumerate() {
            if config.miss_rate > 0.0 && rng.random::<f64>() < config.miss_rate {
                continue;
            }
            let mut bbox = boxes[identity].0;
            if let Some(noise) = &coordinate_noise {
                bbox.x += noise.sample(&mut rng);
                bbox.y += noise.sample(&mut rng);
                bbox.w = (bbox.w + noise.sample(&mut rng)).max(1.0);
                bbox.h = (bbox.h + noise.sample(&mut rng)).max(1.0);
            }
            let descriptor = match &descriptor_noise {
                Some(noise) => {
                    let noisy: Vec<f64> = person
                        .descriptor
                        .iter()
                        .map(|v| v + noise.sample(&mut rng))
                        .collect();
                    normalized(noisy)
                }
                None => person.descriptor.clone(),
            };
            detections.push(DetectionRecord {
                frame_id,
                timestamp_ms,
                x: bbox.x,
                y: bbox.y,
                w: bbox.w,
                h: bbox.h,
                confidence: rng.random_range(0.6..1.0),
                descriptor: Some(descriptor),
            });
        }

        if let Some(poisson) = &false_positives {
            let count = poisson.sample(&mut rng) as usize;
            for _ in 0..count {
                let w = rng.random_range(20.0..80.0);
                let h = rng.random_range(40.0..180.0);
                detections.push(DetectionRecord {
                    frame_id,
                    timestamp_ms,
                    x: rng.random_range(0.0..(config.frame_width - w)),
                    y: rng.random_range(0.0..(config.frame_height - h)),
                    w,
                    h,
                    confidence: rng.random_range(0.5..0.9),
                    descriptor: Some(random_unit_vector(&mut rng, config.descriptor_dim)),
                });
            }
        }

        truth.push(GroundTruthFrame { frame_id, boxes });
    }

    Ok(Scenario { truth, detections })
}

fn advance(person: &mut Person, frame_width: f64, frame_height: f64) {
    person.x += person.vx;
    person.y += person.vy;
    let max_x = frame_width - person.w;
    let max_y = frame_height - person.h;
    if person.x < 0.0 {
        person.x = -person.x;
        person.vx = -person.vx;
    } else if person.x > max_x {
        person.x = 2.0 * max_x - person.x;
        person.vx = -person.vx;
    }
    if person.y < 0.0 {
        person.y = -person.y;
        person.vy = -person.vy;
    } else if person.y > max_y {
        person.y = 2.0 * max_y - person.y;
        person.vy = -person.vy;
    }
}

fn random_unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    loop {
        let v: Vec<f64> = (0..dim).map(|_| normal.sample(rng)).collect();
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if norm_sq > 1e-12 {
            return normalized(v);
        }
    }
}

fn normalized(mut v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    for x in &mut v {
        *x /= norm;
    }
    v
}
