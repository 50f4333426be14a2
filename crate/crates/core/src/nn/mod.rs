//! Deterministic f64 network kernel.

pub mod adam;
pub mod checkpoint;
pub mod conv;
pub mod dense;
pub(crate) mod gemm;
pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod model;
pub mod network;
pub mod pool;
pub mod recurrent;
pub mod spec;
pub mod tensor;

pub use adam::{adam_step, AdamState};
pub use checkpoint::ModelCheckpoint;
pub use conv::Conv2d;
pub use dense::Dense;
pub use gradcheck::{gradient_check, gradient_check_entries, GradCheckReport};
pub use loss::{cross_entropy_loss, mse_loss, softmax, softmax_cross_entropy};
pub use lstm::LstmParams;
pub use model::Parameterized;
pub use network::{Layer, Network};
pub use pool::MaxPool2d;
pub use recurrent::RecurrentClassifier;
pub use spec::LayerSpec;
pub use tensor::Tensor;
