use serde::{Deserialize, Serialize};

use crate::synth::label::GestureLabel;
use crate::{Error, Result};

pub const CANVAS_WIDTH: f64 = 640.0;
pub const CANVAS_HEIGHT: f64 = 480.0;

/// Nominal capture rate; used to stamp synthetic samples.
pub const FRAMES_PER_SECOND: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn in_canvas(self) -> bool {
        (0.0..CANVAS_WIDTH).contains(&self.x) && (0.0..CANVAS_HEIGHT).contains(&self.y)
    }

    /// Nearest point inside the canvas.
    pub fn clamped(self) -> Self {
        const EPS: f64 = 1e-3;
        Self {
            x: self.x.clamp(0.0, CANVAS_WIDTH - EPS),
            y: self.y.clamp(0.0, CANVAS_HEIGHT - EPS),
        }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Time-ordered fingertip positions on the 640×480 canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub points: Vec<Point>,
    pub timestamps_ms: Vec<u64>,
    pub label: Option<GestureLabel>,
    pub seed: u64,
}

/// Timestamps at the nominal frame rate.
pub fn frame_timestamps(n: usize) -> Vec<u64> {
    (0..n)
        .map(|k| (k as f64 * 1000.0 / FRAMES_PER_SECOND).round() as u64)
        .collect()
}

impl Trajectory {
    /// Builds a validated trajectory.
    pub fn new(
        points: Vec<Point>,
        timestamps_ms: Vec<u64>,
        label: Option<GestureLabel>,
        seed: u64,
    ) -> Result<Self> {
        let t = Self {
            points,
            timestamps_ms,
            label,
            seed,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::invalid(format!(
                "trajectory needs at least 2 points, has {}",
                self.points.len()
            )));
        }
        if self.timestamps_ms.len() != self.points.len() {
            return Err(Error::invalid(format!(
                "{} points but {} timestamps",
                self.points.len(),
                self.timestamps_ms.len()
            )));
        }
        if let Some(i) = self.points.iter().position(|p| !p.in_canvas()) {
            let p = self.points[i];
            return Err(Error::OutOfBounds(format!(
                "point {i} = ({}, {}) outside the {CANVAS_WIDTH}×{CANVAS_HEIGHT} canvas",
                p.x, p.y
            )));
        }
        if let Some(i) = self.timestamps_ms.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(format!(
                "timestamps not strictly increasing at index {}",
                i + 1
            )));
        }
        if self.label == Some(GestureLabel::Unclassified) {
            return Err(Error::invalid("Unclassified is not a trajectory label"));
        }
        Ok(())
    }

    /// Total polyline length in pixels.
    pub fn arc_length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
}
