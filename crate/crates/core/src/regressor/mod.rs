//! Fingertip regression from 99×99 RGB crops.

pub mod crop;
pub mod eval;
pub mod model;
pub mod train;

pub use crop::{crop_and_resize, CropBox, CropMapping};
pub use eval::{eval_success_curve, SuccessCurve};
pub use model::{build_regressor, FingertipRegressor, RegressorSpec, StructureAudit};
pub use train::{train_regressor, train_regressor_with, EpochLoss, RegressorTrainConfig};
