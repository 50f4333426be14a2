//! Trajectory normalization and arc-length resampling.

use crate::synth::{Point, Trajectory, CANVAS_HEIGHT, CANVAS_WIDTH};
use crate::{Error, Result};

/// Fixed length used by the DTW and SVM baselines.
pub const RESAMPLE_LENGTH: usize = 32;

/// Scales canvas pixels into `[0, 1]²`.
///
/// Inputs must be pixel-scale: a trajectory whose points all lie inside
/// `[0, 1]²` is taken to be normalized already and rejected.
pub fn normalize_points(points: &[Point]) -> Result<Vec<[f64; 2]>> {
    if points.is_empty() {
        return Err(Error::invalid("trajectory is empty"));
    }
    if let Some(p) = points.iter().find(|p| !p.in_canvas()) {
        return Err(Error::OutOfBounds(format!("point ({}, {}) outside the canvas", p.x, p.y)));
    }
    if points.len() > 1 && points.iter().all(|p| p.x <= 1.0 && p.y <= 1.0) {
        return Err(Error::invalid("trajectory looks normalized already; expected pixel coordinates"));
    }
    Ok(points
        .iter()
        .map(|p| [p.x / CANVAS_WIDTH, p.y / CANVAS_HEIGHT])
        .collect())
}

pub fn normalize_trajectory(traj: &Trajectory) -> Result<Vec<[f64; 2]>> {
    if traj.points.len() < 2 {
        return Err(Error::invalid("trajectory needs at least 2 points"));
    }
    normalize_points(&traj.points)
}

/// Network input rows.
pub fn to_inputs(seq: &[[f64; 2]]) -> Vec<Vec<f64>> {
    seq.iter().map(|p| p.to_vec()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub points: Vec<[f64; 2]>,
    /// Set when the input had zero arc length; `points` then repeats the
    /// first point.
    pub degenerate: bool,
}

/// `len` points at equal arc-length spacing; endpoints copied exactly.
pub fn resample_trajectory(seq: &[[f64; 2]], len: usize) -> Result<Resampled> {
    if len < 2 {
        return Err(Error::invalid("resample length must be at least 2"));
    }
    if seq.is_empty() {
        return Err(Error::invalid("trajectory is empty"));
    }
    let mut cumulative = Vec::with_capacity(seq.len());
    let mut total = 0.0;
    cumulative.push(0.0);
    for w in seq.windows(2) {
        total += (w[1][0] - w[0][0]).hypot(w[1][1] - w[0][1]);
        cumulative.push(total);
    }
    if total <= 0.0 {
        return Ok(Resampled {
            points: vec![seq[0]; len],
            degenerate: true,
        });
    }
    let mut points = Vec::with_capacity(len);
    points.push(seq[0]);
    let mut seg = 0;
    for k in 1..len - 1 {
        let target = total * k as f64 / (len - 1) as f64;
        while cumulative[seg + 1] < target {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let t = if span > 0.0 { (target - cumulative[seg]) / span } else { 0.0 };
        let (a, b) = (seq[seg], seq[seg + 1]);
        points.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
    }
    points.push(seq[seq.len() - 1]);
    Ok(Resampled {
        points,
        degenerate: false,
    })
}

/// Normalized, resampled trajectory flattened as `[x0, y0, x1, y1, …]`.
pub fn baseline_features(traj: &Trajectory) -> Result<Vec<f64>> {
    Ok(resample_trajectory(&normalize_trajectory(traj)?, RESAMPLE_LENGTH)?
        .points
        .into_iter()
        .flatten()
        .collect())
}
