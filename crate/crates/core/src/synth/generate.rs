use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::{derive_seed, seeded, Rng};
use crate::synth::label::GestureLabel;
use crate::synth::templates::{sample_by_arc_length, template, TEMPLATE_CENTER, TEMPLATE_SCALE};
use crate::synth::trajectory::{frame_timestamps, Point, Trajectory, CANVAS_HEIGHT, CANVAS_WIDTH};
use crate::{Error, Result};

/// Perturbation model applied to ideal templates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Per-point Gaussian jitter, pixels.
    pub jitter_sigma: f64,
    /// Uniform scale factor drawn from `1 ± scale_range`.
    pub scale_range: f64,
    /// Uniform rotation drawn from `± rotation_range` radians.
    pub rotation_range: f64,
    /// Uniform offset per axis drawn from `± translation_range` pixels.
    pub translation_range: f64,
    /// Inclusive range of points per trajectory.
    pub points_range: (usize, usize),
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            jitter_sigma: 6.0,
            scale_range: 0.2,
            rotation_range: 10f64.to_radians(),
            translation_range: 60.0,
            points_range: (24, 96),
            seed: 7,
        }
    }
}

impl SynthConfig {
    /// Templates only: no jitter, scale, rotation or translation.
    pub fn noiseless() -> Self {
        Self {
            jitter_sigma: 0.0,
            scale_range: 0.0,
            rotation_range: 0.0,
            translation_range: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ranges = [
            self.jitter_sigma,
            self.scale_range,
            self.rotation_range,
            self.translation_range,
        ];
        if ranges.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::invalid("synth ranges must be finite and non-negative"));
        }
        if self.scale_range >= 1.0 {
            return Err(Error::invalid("scale_range must be below 1"));
        }
        let (lo, hi) = self.points_range;
        if lo < 8 || hi < lo {
            return Err(Error::invalid(format!(
                "points_range ({lo}, {hi}) must satisfy 8 ≤ lo ≤ hi"
            )));
        }
        Ok(())
    }
}

fn symmetric(rng: &mut Rng, range: f64) -> f64 {
    if range > 0.0 {
        rng.random_range(-range..=range)
    } else {
        0.0
    }
}

/// One perturbed sample of `label`'s template. Pure in `(label, config, seed)`.
pub fn generate_trajectory(label: GestureLabel, config: &SynthConfig, seed: u64) -> Result<Trajectory> {
    config.validate()?;
    let shape = template(label)
        .ok_or_else(|| Error::invalid("cannot generate the Unclassified label"))?;
    let mut rng = seeded(seed);
    let (lo, hi) = config.points_range;
    let n = rng.random_range(lo..=hi);
    let scale = 1.0 + symmetric(&mut rng, config.scale_range);
    let angle = symmetric(&mut rng, config.rotation_range);
    let tx = symmetric(&mut rng, config.translation_range);
    let ty = symmetric(&mut rng, config.translation_range);
    let (sin, cos) = angle.sin_cos();
    let jitter = Normal::new(0.0, config.jitter_sigma).expect("validated sigma");
    let points = sample_by_arc_length(&shape, n)
        .into_iter()
        .map(|u| {
            let (x, y) = (u.x * TEMPLATE_SCALE * scale, u.y * TEMPLATE_SCALE * scale);
            let mut p = Point::new(
                TEMPLATE_CENTER.x + tx + cos * x - sin * y,
                TEMPLATE_CENTER.y + ty + sin * x + cos * y,
            );
            if config.jitter_sigma > 0.0 {
                p.x += jitter.sample(&mut rng);
                p.y += jitter.sample(&mut rng);
            }
            p.clamped()
        })
        .collect();
    Trajectory::new(points, frame_timestamps(n), Some(label), seed)
}

/// Smoothed random walk over the canvas, unlabelled; a stand-in for
/// aimless hand motion.
pub fn generate_random_trajectory(config: &SynthConfig, seed: u64) -> Result<Trajectory> {
    config.validate()?;
    let mut rng = seeded(seed);
    let (lo, hi) = config.points_range;
    let n = rng.random_range(lo..=hi);
    let turn = Normal::new(0.0, 0.35).expect("positive sigma");
    let mut p = Point::new(
        rng.random_range(0.2 * CANVAS_WIDTH..0.8 * CANVAS_WIDTH),
        rng.random_range(0.2 * CANVAS_HEIGHT..0.8 * CANVAS_HEIGHT),
    );
    let mut heading: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let mut speed: f64 = rng.random_range(4.0..12.0);
    let mut velocity = (speed * heading.cos(), speed * heading.sin());
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        points.push(p.clamped());
        heading += turn.sample(&mut rng);
        speed = (speed + rng.random_range(-1.5..1.5)).clamp(2.0, 16.0);
        // Exponential smoothing of the velocity keeps the walk curvy rather
        // than jagged.
        velocity.0 = 0.7 * velocity.0 + 0.3 * speed * heading.cos();
        velocity.1 = 0.7 * velocity.1 + 0.3 * speed * heading.sin();
        p = Point::new(p.x + velocity.0, p.y + velocity.1);
        if !(0.0..CANVAS_WIDTH).contains(&p.x) {
            velocity.0 = -velocity.0;
            heading = std::f64::consts::PI - heading;
        }
        if !(0.0..CANVAS_HEIGHT).contains(&p.y) {
            velocity.1 = -velocity.1;
            heading = -heading;
        }
        p = p.clamped();
    }
    Trajectory::new(points, frame_timestamps(n), None, seed)
}

/// Seed of the `index`-th sample of class `class` in a dataset drawn from
/// `master`. Each class owns a contiguous block, so any per-class prefix /
/// suffix split yields disjoint seed blocks.
pub fn record_seed(master: u64, n_per_class: usize, class: usize, index: usize) -> u64 {
    derive_seed(master, 0).wrapping_add((class * n_per_class + index) as u64)
}

/// Balanced dataset, class-major order, `n_per_class` samples per gesture.
pub fn generate_dataset(n_per_class: usize, config: &SynthConfig) -> Result<Vec<Trajectory>> {
    if n_per_class == 0 {
        return Err(Error::invalid("n_per_class must be at least 1"));
    }
    config.validate()?;
    let mut out = Vec::with_capacity(n_per_class * GestureLabel::GESTURES.len());
    for (class, label) in GestureLabel::GESTURES.into_iter().enumerate() {
        for i in 0..n_per_class {
            out.push(generate_trajectory(
                label,
                config,
                record_seed(config.seed, n_per_class, class, i),
            )?);
        }
    }
    Ok(out)
}

/// Splits a dataset per class: the `train_per_class` lowest seeds of each
/// class go to training, the rest to test.
pub fn split_per_class(records: &[Trajectory], train_per_class: usize) -> (Vec<Trajectory>, Vec<Trajectory>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for label in GestureLabel::GESTURES {
        let mut class: Vec<&Trajectory> = records.iter().filter(|t| t.label == Some(label)).collect();
        class.sort_by_key(|t| t.seed);
        for (i, t) in class.into_iter().enumerate() {
            if i < train_per_class {
                train.push(t.clone());
            } else {
                test.push(t.clone());
            }
        }
    }
    (train, test)
}
