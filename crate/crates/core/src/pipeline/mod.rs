//! Stream-level cascade: simulated detector, implicit trigger, classifier.

pub mod events;
pub mod fixture;
pub mod robustness;
pub mod run;
pub mod trigger;

pub use events::{simulate_stream, DetectionEvent, DetectorSimConfig};
pub use robustness::{robustness_eval, CellResult, RobustnessGrid, RobustnessReport};
pub use run::{classify_timed, run_pipeline, PipelineOutput, StageLatencies};
pub use trigger::{trigger_step, TriggerMode, TriggerState, TRIGGER_FRAMES};
