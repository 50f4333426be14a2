//! Per-frame detector output and the simulated detector.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::rng::seeded;
use crate::synth::{Point, Trajectory, CANVAS_HEIGHT, CANVAS_WIDTH};
use crate::{Error, Result};

/// Frames without detections required on either side of a gesture.
pub const MIN_PADDING_FRAMES: usize = 5;

/// Side of the simulated hand box, in canvas pixels.
const HAND_BOX: f64 = 120.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEvent {
    pub frame_index: u64,
    pub present: bool,
    /// `[x0, y0, width, height]`
    #[serde(rename = "box")]
    pub bbox: Option<[f64; 4]>,
    pub tip: Option<Point>,
    pub confidence: f64,
}

impl DetectionEvent {
    pub fn present(frame_index: u64, tip: Point, confidence: f64) -> Self {
        let x0 = (tip.x - HAND_BOX / 2.0).max(0.0);
        let y0 = (tip.y - HAND_BOX / 2.0).max(0.0);
        Self {
            frame_index,
            present: true,
            bbox: Some([
                x0,
                y0,
                (tip.x + HAND_BOX / 2.0).min(CANVAS_WIDTH) - x0,
                (tip.y + HAND_BOX / 2.0).min(CANVAS_HEIGHT) - y0,
            ]),
            tip: Some(tip),
            confidence,
        }
    }

    pub fn absent(frame_index: u64) -> Self {
        Self {
            frame_index,
            present: false,
            bbox: None,
            tip: None,
            confidence: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::invalid(format!("confidence {} outside [0, 1]", self.confidence)));
        }
        match (self.present, self.tip) {
            (false, None) if self.bbox.is_none() => Ok(()),
            (false, _) => Err(Error::invalid("absent event carries a box or tip")),
            (true, Some(tip)) if tip.in_canvas() => Ok(()),
            (true, Some(tip)) => Err(Error::OutOfBounds(format!("tip ({}, {}) outside the canvas", tip.x, tip.y))),
            (true, None) => Err(Error::invalid("present event without a tip")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorSimConfig {
    /// Chance a gesture frame yields a detection.
    pub detect_prob: f64,
    /// Chance an empty frame yields a spurious detection (tip uniform over
    /// the canvas).
    pub false_positive_prob: f64,
    /// Standard deviation of the Gaussian tip error, pixels.
    pub tip_jitter_sigma: f64,
    pub seed: u64,
}

impl DetectorSimConfig {
    pub fn perfect(seed: u64) -> Self {
        Self {
            detect_prob: 1.0,
            false_positive_prob: 0.0,
            tip_jitter_sigma: 0.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("detect_prob", self.detect_prob), ("false_positive_prob", self.false_positive_prob)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::invalid(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if !(self.tip_jitter_sigma >= 0.0 && self.tip_jitter_sigma.is_finite()) {
            return Err(Error::invalid("tip_jitter_sigma must be finite and non-negative"));
        }
        Ok(())
    }
}

/// `lead` empty frames, one frame per trajectory point, then `trail` empty
/// frames, passed through the simulated detector.
pub fn simulate_stream(
    traj: &Trajectory,
    lead: usize,
    trail: usize,
    config: &DetectorSimConfig,
) -> Result<Vec<DetectionEvent>> {
    config.validate()?;
    if lead < MIN_PADDING_FRAMES || trail < MIN_PADDING_FRAMES {
        return Err(Error::invalid(format!(
            "lead and trail must be at least {MIN_PADDING_FRAMES} frames"
        )));
    }
    let mut rng = seeded(config.seed);
    let jitter = Normal::new(0.0, config.tip_jitter_sigma).map_err(|e| Error::invalid(e.to_string()))?;
    let total = lead + traj.points.len() + trail;
    let mut events = Vec::with_capacity(total);
    for k in 0..total {
        let frame = k as u64;
        let gesture = k.checked_sub(lead).and_then(|i| traj.points.get(i));
        let event = match gesture {
            Some(p) => {
                if rng.random_bool(config.detect_prob) {
                    let tip = if config.tip_jitter_sigma > 0.0 {
                        Point::new(p.x + jitter.sample(&mut rng), p.y + jitter.sample(&mut rng)).clamped()
                    } else {
                        *p
                    };
                    DetectionEvent::present(frame, tip, 1.0)
                } else {
                    DetectionEvent::absent(frame)
                }
            }
            None => {
                if rng.random_bool(config.false_positive_prob) {
                    let tip = Point::new(rng.random_range(0.0..CANVAS_WIDTH), rng.random_range(0.0..CANVAS_HEIGHT));
                    DetectionEvent::present(frame, tip, 1.0)
                } else {
                    DetectionEvent::absent(frame)
                }
            }
        };
        events.push(event);
    }
    Ok(events)
}
