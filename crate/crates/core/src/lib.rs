//! Egocentric pointing-gesture recognition at desk scale.
//!
//! The crate is organised as a cascade:
//!
//! - [`nn`]: a small deterministic f64 network kernel (dense, conv, pool, LSTM,
//!   Bi-LSTM, losses, Adam, gradient checking, checkpoints).
//! - [`synth`]: parametric generators for gesture trajectories on a 640×480
//!   canvas and for 99×99 fingertip frames.
//! - [`regressor`]: the two-block CNN that regresses fingertip coordinates.
//! - [`classify`]: the Bi-LSTM classifier and its LSTM / DTW / linear SVM
//!   baselines, plus metrics.
//! - [`pipeline`]: simulated detector streams, the five-frame implicit trigger,
//!   and the latency / robustness harnesses.

pub mod classify;
pub mod error;
pub mod nn;
pub mod pipeline;
pub mod regressor;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
