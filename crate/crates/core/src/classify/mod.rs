//! Trajectory classifiers and evaluation metrics.

pub mod classifier;
pub mod dtw;
pub mod metrics;
pub mod preprocess;
pub mod svm;
pub mod train;

pub use classifier::{
    gate_scores, predict_all, train_classifier, ClassificationResult, ClassifierKind, ClassifierTrainConfig, Prepared,
    TrainedClassifier, DEFAULT_THRESHOLD,
};
pub use dtw::{dtw_distance, DtwClassifier};
pub use metrics::{compute_metrics, MetricsReport};
pub use preprocess::{normalize_trajectory, resample_trajectory, RESAMPLE_LENGTH};
pub use svm::{LinearSvm, SvmConfig};
pub use train::{train_recurrent, EpochAccuracy, SequenceTrainConfig};
