//! End-to-end accuracy under detector noise.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::classify::TrainedClassifier;
use crate::pipeline::events::{simulate_stream, DetectorSimConfig};
use crate::pipeline::run::run_pipeline;
use crate::rng::derive_seed;
use crate::synth::Trajectory;
use crate::{Error, Result};

/// Empty frames before and after each simulated gesture.
pub const STREAM_PADDING: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessGrid {
    pub detect_probs: Vec<f64>,
    pub false_positive_probs: Vec<f64>,
    pub sigmas: Vec<f64>,
}

impl Default for RobustnessGrid {
    fn default() -> Self {
        Self {
            detect_probs: vec![1.0, 0.95, 0.9],
            false_positive_probs: vec![0.0, 0.02, 0.05],
            sigmas: vec![0.0, 4.0, 8.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub detect_prob: f64,
    pub false_positive_prob: f64,
    pub sigma: f64,
    pub streams: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub threshold: f64,
    pub cells: Vec<CellResult>,
}

impl RobustnessReport {
    pub fn cell(&self, detect_prob: f64, false_positive_prob: f64, sigma: f64) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.detect_prob == detect_prob && c.false_positive_prob == false_positive_prob && c.sigma == sigma
        })
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("threshold {}\ndetect_prob  fp_prob  sigma_px  streams  accuracy\n", self.threshold);
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{:>11.2}  {:>7.2}  {:>8.1}  {:>7}  {:>8.4}",
                c.detect_prob, c.false_positive_prob, c.sigma, c.streams, c.accuracy
            );
        }
        s
    }
}

/// A stream counts as correct when its first emitted gesture is classified
/// as the source label. Stream `k` replays `dataset[k % len]` with detector
/// seed `derive_seed(seed, k)` in every cell.
pub fn robustness_eval(
    classifier: &TrainedClassifier,
    dataset: &[Trajectory],
    grid: &RobustnessGrid,
    streams_per_cell: usize,
    threshold: f64,
    seed: u64,
) -> Result<RobustnessReport> {
    if dataset.is_empty() || streams_per_cell == 0 {
        return Err(Error::invalid("need a non-empty dataset and at least one stream per cell"));
    }
    if dataset.iter().any(|t| t.label.is_none()) {
        return Err(Error::invalid("robustness dataset must be labelled"));
    }
    let mut cells = Vec::new();
    for &detect_prob in &grid.detect_probs {
        for &false_positive_prob in &grid.false_positive_probs {
            for &sigma in &grid.sigmas {
                let mut correct = 0;
                for k in 0..streams_per_cell {
                    let traj = &dataset[k % dataset.len()];
                    let config = DetectorSimConfig {
                        detect_prob,
                        false_positive_prob,
                        tip_jitter_sigma: sigma,
                        seed: derive_seed(seed, k as u64),
                    };
                    let events = simulate_stream(traj, STREAM_PADDING, STREAM_PADDING, &config)?;
                    let outputs = run_pipeline(&events, classifier, threshold)?;
                    let first = outputs.first().and_then(|o| o.result.as_ref().ok());
                    if first.is_some_and(|r| Some(r.label) == traj.label) {
                        correct += 1;
                    }
                }
                cells.push(CellResult {
                    detect_prob,
                    false_positive_prob,
                    sigma,
                    streams: streams_per_cell,
                    correct,
                    accuracy: correct as f64 / streams_per_cell as f64,
                });
            }
        }
    }
    Ok(RobustnessReport { threshold, cells })
}
