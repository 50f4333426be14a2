//! Per-connection state: one trigger per session over a shared frozen model.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use gestarlite_core::classify::TrainedClassifier;
use gestarlite_core::pipeline::{classify_timed, DetectionEvent, TriggerState};
use gestarlite_core::synth::{GestureLabel, Point};

use crate::protocol::{ClientMessage, ServerMessage};

#[derive(Debug, Clone)]
pub struct SessionState {
    pub session_id: u64,
    pub trigger: TriggerState,
    pub model: Arc<TrainedClassifier>,
    pub threshold: f64,
    /// Accepted point/absent messages; doubles as the frame index.
    pub messages: u64,
}

impl SessionState {
    pub fn new(session_id: u64, model: Arc<TrainedClassifier>, threshold: f64) -> Self {
        Self {
            session_id,
            trigger: TriggerState::new(),
            model,
            threshold,
            messages: 0,
        }
    }

    /// Handles one raw text message. Malformed input yields a single error
    /// response and leaves the session untouched.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        let received = Instant::now();
        match serde_json::from_str::<ClientMessage>(text) {
            Ok(msg) => self.handle_message(msg, received),
            Err(e) => vec![error(format!("malformed message: {e}"))],
        }
    }

    pub fn handle_message(&mut self, msg: ClientMessage, received: Instant) -> Vec<ServerMessage> {
        let event = match msg {
            ClientMessage::Reset => {
                self.trigger.reset();
                self.messages = 0;
                return vec![ServerMessage::State { recording: false }];
            }
            ClientMessage::Point { x, y, .. } => {
                let p = Point::new(x, y);
                if !x.is_finite() || !y.is_finite() || !p.in_canvas() {
                    return vec![error(format!("point ({x}, {y}) outside the 640x480 canvas"))];
                }
                DetectionEvent::present(self.messages, p, 1.0)
            }
            ClientMessage::Absent { .. } => DetectionEvent::absent(self.messages),
        };
        let was_recording = self.trigger.is_recording();
        let emitted = match self.trigger.step(&event) {
            Ok(e) => e,
            Err(e) => return vec![error(e.to_string())],
        };
        self.messages += 1;
        let mut out = Vec::new();
        if self.trigger.is_recording() != was_recording {
            out.push(ServerMessage::State {
                recording: self.trigger.is_recording(),
            });
        }
        if let Some(gesture) = emitted {
            let (result, _, _) = classify_timed(&self.model, &gesture, self.threshold);
            out.push(match result {
                Ok(r) => ServerMessage::Classification {
                    label: r.label.name().to_string(),
                    probs: GestureLabel::GESTURES
                        .iter()
                        .zip(&r.probabilities)
                        .map(|(l, p)| (l.name().to_string(), *p))
                        .collect::<BTreeMap<_, _>>(),
                    latency_ms: received.elapsed().as_secs_f64() * 1000.0,
                },
                Err(reason) => error(reason),
            });
        }
        out
    }
}

fn error(reason: String) -> ServerMessage {
    ServerMessage::Error { reason }
}
