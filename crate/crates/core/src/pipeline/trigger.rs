//! The implicit trigger: 5 consecutive detections start a recording, 5
//! consecutive misses end it.

use serde::{Deserialize, Serialize};

use crate::pipeline::events::DetectionEvent;
use crate::synth::trajectory::FRAMES_PER_SECOND;
use crate::synth::{Point, Trajectory};
use crate::{Error, Result};

pub const TRIGGER_FRAMES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TriggerMode {
    Idle,
    Recording,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriggerState {
    pub mode: TriggerMode,
    pub consecutive_present: usize,
    pub consecutive_absent: usize,
    /// Tips recorded since triggering; empty while idle.
    pub buffer: Vec<(u64, Point)>,
    /// Tips of the current run of detections while idle.
    pending: Vec<(u64, Point)>,
    last_frame: Option<u64>,
}

impl Default for TriggerState {
    fn default() -> Self {
        Self::new()
    }
}

impl TriggerState {
    pub fn new() -> Self {
        Self {
            mode: TriggerMode::Idle,
            consecutive_present: 0,
            consecutive_absent: 0,
            buffer: Vec::new(),
            pending: Vec::new(),
            last_frame: None,
        }
    }

    pub fn is_recording(&self) -> bool {
        self.mode == TriggerMode::Recording
    }

    pub fn last_frame(&self) -> Option<u64> {
        self.last_frame
    }

    /// Advances by one event. Returns the finished gesture when a recording
    /// closes. On error the state is left unchanged.
    pub fn step(&mut self, event: &DetectionEvent) -> Result<Option<Trajectory>> {
        if let Some(last) = self.last_frame {
            if event.frame_index <= last {
                return Err(Error::OutOfOrder {
                    last,
                    got: event.frame_index,
                });
            }
        }
        event.validate()?;
        self.last_frame = Some(event.frame_index);
        let tip = event.tip.filter(|_| event.present);
        match (self.mode, tip) {
            (TriggerMode::Idle, Some(tip)) => {
                self.consecutive_present += 1;
                self.pending.push((event.frame_index, tip));
                if self.consecutive_present == TRIGGER_FRAMES {
                    self.mode = TriggerMode::Recording;
                    self.consecutive_present = 0;
                    self.buffer = std::mem::take(&mut self.pending);
                }
                Ok(None)
            }
            (TriggerMode::Idle, None) => {
                self.consecutive_present = 0;
                self.pending.clear();
                Ok(None)
            }
            (TriggerMode::Recording, Some(tip)) => {
                self.consecutive_absent = 0;
                self.buffer.push((event.frame_index, tip));
                Ok(None)
            }
            (TriggerMode::Recording, None) => {
                self.consecutive_absent += 1;
                if self.consecutive_absent < TRIGGER_FRAMES {
                    return Ok(None);
                }
                self.mode = TriggerMode::Idle;
                self.consecutive_absent = 0;
                let samples = std::mem::take(&mut self.buffer);
                Ok(Some(buffer_to_trajectory(samples)?))
            }
        }
    }

    /// Clears everything, including the frame-order guard.
    pub fn reset(&mut self) {
        *self = Self::new();
    }
}

/// Free-function form of [`TriggerState::step`].
pub fn trigger_step(mut state: TriggerState, event: &DetectionEvent) -> Result<(TriggerState, Option<Trajectory>)> {
    let out = state.step(event)?;
    Ok((state, out))
}

fn buffer_to_trajectory(samples: Vec<(u64, Point)>) -> Result<Trajectory> {
    let timestamps = samples
        .iter()
        .map(|(f, _)| (*f as f64 * 1000.0 / FRAMES_PER_SECOND).round() as u64)
        .collect();
    Trajectory::new(samples.into_iter().map(|(_, p)| p).collect(), timestamps, None, 0)
}
