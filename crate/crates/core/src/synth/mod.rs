//! Synthetic gesture trajectories and fingertip frames.

pub mod frame;
pub mod generate;
pub mod io;
pub mod label;
pub mod templates;
pub mod trajectory;

pub use frame::{render_fingertip_frame, FrameSample, FRAME_SIZE};
pub use generate::{
    generate_dataset, generate_random_trajectory, generate_trajectory, split_per_class, SynthConfig,
};
pub use label::{GestureLabel, NUM_CLASSES};
pub use trajectory::{Point, Trajectory, CANVAS_HEIGHT, CANVAS_WIDTH};
