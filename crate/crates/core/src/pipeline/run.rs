//! Trigger + classifier over an event stream, with per-stage timing.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classify::{ClassificationResult, TrainedClassifier};
use crate::pipeline::events::DetectionEvent;
use crate::pipeline::trigger::TriggerState;
use crate::synth::Trajectory;
use crate::Result;

/// Wall-clock milliseconds per stage for one emitted gesture. `trigger_ms`
/// covers every event consumed since the previous emission.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StageLatencies {
    pub trigger_ms: f64,
    pub preprocess_ms: f64,
    pub classify_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Frame index of the event that closed the gesture.
    pub end_frame: u64,
    pub trajectory: Trajectory,
    /// Classifier failures are reported per gesture.
    pub result: std::result::Result<ClassificationResult, String>,
    pub latencies: StageLatencies,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

/// Classifies one emitted gesture, timing preprocessing and inference.
pub fn classify_timed(
    classifier: &TrainedClassifier,
    traj: &Trajectory,
    threshold: f64,
) -> (std::result::Result<ClassificationResult, String>, f64, f64) {
    let t0 = Instant::now();
    let prepared = classifier.prepare(traj);
    let preprocess_ms = ms(t0);
    let t1 = Instant::now();
    let result = prepared
        .and_then(|p| classifier.classify_prepared(&p, threshold))
        .map_err(|e| e.to_string());
    (result, preprocess_ms, ms(t1))
}

/// Fails only on stream-level errors (out-of-order or malformed events).
pub fn run_pipeline(
    events: &[DetectionEvent],
    classifier: &TrainedClassifier,
    threshold: f64,
) -> Result<Vec<PipelineOutput>> {
    let mut state = TriggerState::new();
    let mut outputs = Vec::new();
    let mut trigger_ms = 0.0;
    for event in events {
        let t0 = Instant::now();
        let emitted = state.step(event)?;
        trigger_ms += ms(t0);
        if let Some(trajectory) = emitted {
            let (result, preprocess_ms, classify_ms) = classify_timed(classifier, &trajectory, threshold);
            outputs.push(PipelineOutput {
                end_frame: event.frame_index,
                trajectory,
                result,
                latencies: StageLatencies {
                    trigger_ms,
                    preprocess_ms,
                    classify_ms,
                    total_ms: trigger_ms + preprocess_ms + classify_ms,
                },
            });
            trigger_ms = 0.0;
        }
    }
    Ok(outputs)
}
