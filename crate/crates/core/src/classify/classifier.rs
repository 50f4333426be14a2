//! Common train / classify surface over the four classifier kinds.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classify::dtw::{dtw_prepare, DtwClassifier};
use crate::classify::preprocess::{baseline_features, normalize_trajectory, to_inputs, RESAMPLE_LENGTH};
use crate::classify::svm::{LinearSvm, SvmConfig};
use crate::classify::train::{train_recurrent, EpochAccuracy, SequenceTrainConfig};
use crate::nn::recurrent::argmax;
use crate::nn::{softmax, LayerSpec, ModelCheckpoint, RecurrentClassifier, Tensor};
use crate::synth::{GestureLabel, Trajectory, NUM_CLASSES};
use crate::{Error, Result};

/// Gate applied to the top softmax probability.
pub const DEFAULT_THRESHOLD: f64 = 0.85;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClassifierKind {
    BiLstm,
    Lstm,
    Dtw1Nn,
    LinearSvm,
}

impl ClassifierKind {
    pub const ALL: [ClassifierKind; 4] = [
        ClassifierKind::BiLstm,
        ClassifierKind::Lstm,
        ClassifierKind::Dtw1Nn,
        ClassifierKind::LinearSvm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::BiLstm => "bilstm",
            ClassifierKind::Lstm => "lstm",
            ClassifierKind::Dtw1Nn => "dtw",
            ClassifierKind::LinearSvm => "svm",
        }
    }
}

impl fmt::Display for ClassifierKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown classifier kind {s:?} (bilstm, lstm, dtw, svm)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub label: GestureLabel,
    /// Softmax output per gesture in class order; empty for DTW and SVM.
    pub probabilities: Vec<f64>,
    /// Raw per-class scores: logits, negated DTW distances, or SVM margins.
    pub scores: Vec<f64>,
}

impl ClassificationResult {
    /// Probability of the reported label (0 when not probabilistic or
    /// unclassified).
    pub fn confidence(&self) -> f64 {
        if self.label.is_gesture() {
            self.probabilities.get(self.label.index()).copied().unwrap_or(0.0)
        } else {
            0.0
        }
    }

    pub fn top_probability(&self) -> Option<f64> {
        self.probabilities.iter().copied().reduce(f64::max)
    }
}

/// Softmax over scores, gated: the argmax label if its probability exceeds
/// `threshold`, otherwise `Unclassified`.
pub fn gate_scores(scores: Vec<f64>, threshold: f64) -> Result<ClassificationResult> {
    let probabilities = softmax(&scores)?;
    let best = argmax(&probabilities);
    let label = if probabilities[best] > threshold {
        GestureLabel::GESTURES[best]
    } else {
        GestureLabel::Unclassified
    };
    Ok(ClassificationResult {
        label,
        probabilities,
        scores,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedClassifier {
    Recurrent(RecurrentClassifier),
    Dtw(DtwClassifier),
    Svm(LinearSvm),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierTrainConfig {
    pub sequence: SequenceTrainConfig,
    pub svm: SvmConfig,
}

impl Default for ClassifierTrainConfig {
    fn default() -> Self {
        Self {
            sequence: SequenceTrainConfig::default(),
            svm: SvmConfig::default(),
        }
    }
}

impl ClassifierTrainConfig {
    pub fn with_seed(seed: u64) -> Self {
        let mut c = Self::default();
        c.sequence.seed = seed;
        c.svm.seed = seed;
        c
    }
}

/// Trains `kind`; the history is non-empty for the recurrent kinds only.
pub fn train_classifier(
    kind: ClassifierKind,
    data: &[Trajectory],
    config: &ClassifierTrainConfig,
    on_epoch: impl FnMut(&EpochAccuracy),
) -> Result<(TrainedClassifier, Vec<EpochAccuracy>)> {
    match kind {
        ClassifierKind::BiLstm | ClassifierKind::Lstm => {
            let (m, h) = train_recurrent(kind == ClassifierKind::BiLstm, data, &config.sequence, on_epoch)?;
            Ok((TrainedClassifier::Recurrent(m), h))
        }
        ClassifierKind::Dtw1Nn => Ok((TrainedClassifier::Dtw(DtwClassifier::fit(data)?), Vec::new())),
        ClassifierKind::LinearSvm => {
            let mut xs = Vec::with_capacity(data.len());
            let mut ys = Vec::with_capacity(data.len());
            for t in data {
                let label = t
                    .label
                    .filter(|l| l.is_gesture())
                    .ok_or_else(|| Error::invalid("training trajectory without a gesture label"))?;
                xs.push(baseline_features(t)?);
                ys.push(label.index());
            }
            let svm = LinearSvm::train(&xs, &ys, NUM_CLASSES, &config.svm)?;
            Ok((TrainedClassifier::Svm(svm), Vec::new()))
        }
    }
}

/// Model input produced by [`TrainedClassifier::prepare`].
#[derive(Debug, Clone, PartialEq)]
pub enum Prepared {
    Sequence(Vec<Vec<f64>>),
    Resampled(Vec<[f64; 2]>),
    Features(Vec<f64>),
}

const DTW_TEMPLATES: &str = "templates";
const DTW_LABELS: &str = "labels";

impl TrainedClassifier {
    pub fn kind(&self) -> ClassifierKind {
        match self {
            TrainedClassifier::Recurrent(m) if m.is_bidirectional() => ClassifierKind::BiLstm,
            TrainedClassifier::Recurrent(_) => ClassifierKind::Lstm,
            TrainedClassifier::Dtw(_) => ClassifierKind::Dtw1Nn,
            TrainedClassifier::Svm(_) => ClassifierKind::LinearSvm,
        }
    }

    /// Classifies a pixel-space trajectory. `threshold` gates the recurrent
    /// models only; DTW and SVM always return a gesture.
    pub fn classify(&self, traj: &Trajectory, threshold: f64) -> Result<ClassificationResult> {
        self.classify_prepared(&self.prepare(traj)?, threshold)
    }

    /// Preprocessing stage: the model-specific input for `traj`.
    pub fn prepare(&self, traj: &Trajectory) -> Result<Prepared> {
        if traj.points.is_empty() {
            return Err(Error::invalid("trajectory is empty"));
        }
        Ok(match self {
            TrainedClassifier::Recurrent(_) => Prepared::Sequence(to_inputs(&normalize_trajectory(traj)?)),
            TrainedClassifier::Dtw(_) => Prepared::Resampled(dtw_prepare(traj)?),
            TrainedClassifier::Svm(_) => Prepared::Features(baseline_features(traj)?),
        })
    }

    pub fn classify_prepared(&self, input: &Prepared, threshold: f64) -> Result<ClassificationResult> {
        match (self, input) {
            (TrainedClassifier::Recurrent(m), Prepared::Sequence(xs)) => gate_scores(m.scores(xs)?, threshold),
            (TrainedClassifier::Dtw(d), Prepared::Resampled(q)) => {
                let (label, distances) = d.nearest(q)?;
                Ok(ClassificationResult {
                    label,
                    probabilities: Vec::new(),
                    scores: distances.into_iter().map(|v| -v).collect(),
                })
            }
            (TrainedClassifier::Svm(s), Prepared::Features(x)) => {
                let margins = s.margins(x)?;
                Ok(ClassificationResult {
                    label: GestureLabel::GESTURES[argmax(&margins)],
                    probabilities: Vec::new(),
                    scores: margins,
                })
            }
            _ => Err(Error::invalid("prepared input does not match the classifier kind")),
        }
    }

    pub fn checkpoint(&self, seed: u64) -> Result<ModelCheckpoint> {
        match self {
            TrainedClassifier::Recurrent(m) => ModelCheckpoint::capture(m, vec![0, 2], m.architecture(), seed),
            TrainedClassifier::Svm(s) => {
                let dim = s.features();
                let weight = Tensor::new(vec![NUM_CLASSES, dim], s.weights.concat())?;
                Ok(ModelCheckpoint {
                    format_version: crate::nn::checkpoint::FORMAT_VERSION,
                    input_shape: vec![RESAMPLE_LENGTH, 2],
                    architecture: vec![LayerSpec::Dense {
                        inputs: dim,
                        units: NUM_CLASSES,
                    }],
                    parameters: vec![
                        ("weight".into(), weight),
                        ("bias".into(), Tensor::vector(s.bias.clone())),
                    ],
                    rng_seed: seed,
                })
            }
            TrainedClassifier::Dtw(d) => {
                let n = d.templates.len();
                let flat: Vec<f64> = d.templates.iter().flat_map(|(t, _)| t.iter().flatten().copied()).collect();
                let labels: Vec<f64> = d.templates.iter().map(|(_, l)| l.index() as f64).collect();
                Ok(ModelCheckpoint {
                    format_version: crate::nn::checkpoint::FORMAT_VERSION,
                    input_shape: vec![RESAMPLE_LENGTH, 2],
                    architecture: Vec::new(),
                    parameters: vec![
                        (DTW_TEMPLATES.into(), Tensor::new(vec![n, RESAMPLE_LENGTH, 2], flat)?),
                        (DTW_LABELS.into(), Tensor::vector(labels)),
                    ],
                    rng_seed: seed,
                })
            }
        }
    }

    pub fn from_checkpoint(ckpt: &ModelCheckpoint) -> Result<Self> {
        match ckpt.architecture.as_slice() {
            [] => {
                let find = |name: &str| {
                    ckpt.parameters
                        .iter()
                        .find(|(n, _)| n == name)
                        .map(|(_, t)| t)
                        .ok_or_else(|| Error::Checkpoint(format!("missing {name}")))
                };
                let (templates, labels) = (find(DTW_TEMPLATES)?, find(DTW_LABELS)?);
                let s = templates.shape();
                if s.len() != 3 || s[2] != 2 || labels.len() != s[0] {
                    return Err(Error::Checkpoint("malformed DTW templates".into()));
                }
                let t = s[1];
                let templates = labels
                    .data()
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| {
                        let label = GestureLabel::from_index(l as usize)
                            .filter(|g| g.is_gesture() && l.fract() == 0.0)
                            .ok_or_else(|| Error::Checkpoint(format!("bad label {l}")))?;
                        let pts = templates.data()[i * t * 2..(i + 1) * t * 2]
                            .chunks(2)
                            .map(|c| [c[0], c[1]])
                            .collect();
                        Ok((pts, label))
                    })
                    .collect::<Result<_>>()?;
                Ok(TrainedClassifier::Dtw(DtwClassifier { templates }))
            }
            [LayerSpec::Dense { inputs, units }] => {
                let [(_, w), (_, b)] = ckpt.parameters.as_slice() else {
                    return Err(Error::Checkpoint("SVM needs weight and bias".into()));
                };
                w.expect_shape(&[*units, *inputs])?;
                b.expect_shape(&[*units])?;
                Ok(TrainedClassifier::Svm(LinearSvm {
                    weights: w.data().chunks(*inputs).map(<[f64]>::to_vec).collect(),
                    bias: b.data().to_vec(),
                }))
            }
            arch => Ok(TrainedClassifier::Recurrent(RecurrentClassifier::from_parts(
                arch,
                ckpt.tensors(),
            )?)),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>, seed: u64) -> Result<()> {
        self.checkpoint(seed)?.save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(&ModelCheckpoint::load(path)?)
    }
}

/// Runs `model` over `data`, returning (predictions, truths).
pub fn predict_all(
    model: &TrainedClassifier,
    data: &[Trajectory],
    threshold: f64,
) -> Result<(Vec<GestureLabel>, Vec<GestureLabel>)> {
    let mut preds = Vec::with_capacity(data.len());
    let mut truths = Vec::with_capacity(data.len());
    for t in data {
        truths.push(t.label.ok_or_else(|| Error::invalid("evaluation trajectory without a label"))?);
        preds.push(model.classify(t, threshold)?.label);
    }
    Ok((preds, truths))
}
