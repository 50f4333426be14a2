//! Minibatch cross-entropy training for the recurrent classifiers.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::classify::preprocess::{normalize_trajectory, to_inputs};
use crate::nn::{adam_step, AdamState, Parameterized, RecurrentClassifier};
use crate::rng::{derive_seed, seeded};
use crate::synth::{GestureLabel, Trajectory, NUM_CLASSES};
use crate::{Error, Result};

pub const UNITS: usize = 30;
pub const MIN_PER_CLASS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceTrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Share of each class held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for SequenceTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch_size: 64,
            learning_rate: 0.001,
            validation_fraction: 0.2,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochAccuracy {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
}

pub(crate) struct Encoded {
    pub inputs: Vec<Vec<f64>>,
    pub target: usize,
}

pub(crate) fn encode(data: &[Trajectory]) -> Result<Vec<Encoded>> {
    data.iter()
        .map(|t| {
            let label = t
                .label
                .filter(|l| l.is_gesture())
                .ok_or_else(|| Error::invalid(format!("trajectory seed {} has no gesture label", t.seed)))?;
            Ok(Encoded {
                inputs: to_inputs(&normalize_trajectory(t)?),
                target: label.index(),
            })
        })
        .collect()
}

/// Stratified split: per class, a seeded shuffle then the last
/// `fraction` of the class goes to validation.
fn stratified_split(data: &[Encoded], fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut rng = seeded(seed);
    let (mut train, mut val) = (Vec::new(), Vec::new());
    for c in 0..NUM_CLASSES {
        let mut idx: Vec<usize> = (0..data.len()).filter(|&i| data[i].target == c).collect();
        idx.shuffle(&mut rng);
        let n_val = (idx.len() as f64 * fraction).round() as usize;
        let cut = idx.len() - n_val;
        train.extend_from_slice(&idx[..cut]);
        val.extend_from_slice(&idx[cut..]);
    }
    (train, val)
}

fn evaluate(model: &RecurrentClassifier, data: &[Encoded], idx: &[usize]) -> Result<(f64, f64)> {
    if idx.is_empty() {
        return Ok((f64::NAN, f64::NAN));
    }
    let (mut loss, mut correct) = (0.0, 0usize);
    for &i in idx {
        let scores = model.scores(&data[i].inputs)?;
        loss += crate::nn::softmax_cross_entropy(&scores, data[i].target)?.0;
        if crate::nn::recurrent::argmax(&scores) == data[i].target {
            correct += 1;
        }
    }
    Ok((loss / idx.len() as f64, correct as f64 / idx.len() as f64))
}

/// Trains a Bi-LSTM (`bidirectional`) or single-direction LSTM. The
/// returned weights are those of the epoch with the best validation
/// accuracy (earliest on ties); with no validation split, the last epoch's.
pub fn train_recurrent(
    bidirectional: bool,
    data: &[Trajectory],
    config: &SequenceTrainConfig,
    mut on_epoch: impl FnMut(&EpochAccuracy),
) -> Result<(RecurrentClassifier, Vec<EpochAccuracy>)> {
    let encoded = encode(data)?;
    let mut counts = [0usize; NUM_CLASSES];
    for e in &encoded {
        counts[e.target] += 1;
    }
    if let Some(c) = counts.iter().position(|&n| n < MIN_PER_CLASS) {
        return Err(Error::invalid(format!(
            "class {} has {} samples; every class needs at least {MIN_PER_CLASS}",
            GestureLabel::GESTURES[c],
            counts[c]
        )));
    }
    if config.batch_size == 0 || !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(Error::invalid("batch size must be positive and validation fraction in [0, 1)"));
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::invalid("learning rate must be finite and non-negative"));
    }
    let (train, val) = stratified_split(&encoded, config.validation_fraction, derive_seed(config.seed, 3));
    let init_seed = derive_seed(config.seed, 1);
    let mut model = if bidirectional {
        RecurrentClassifier::bilstm(2, UNITS, NUM_CLASSES, init_seed)
    } else {
        RecurrentClassifier::lstm(2, UNITS, NUM_CLASSES, init_seed)
    };
    let mut adam = AdamState::new(&model.params(), config.learning_rate);
    let mut rng = seeded(derive_seed(config.seed, 2));
    let mut order = train.clone();
    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(f64, RecurrentClassifier)> = None;

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut total, mut correct) = (0.0, 0usize);
        for batch in order.chunks(config.batch_size) {
            let mut grads = model.zero_grads();
            for &i in batch {
                let (loss, predicted) = model.accumulate_gradients(&encoded[i].inputs, encoded[i].target, &mut grads)?;
                total += loss;
                correct += (predicted == encoded[i].target) as usize;
            }
            let scale = 1.0 / batch.len() as f64;
            grads.iter_mut().for_each(|g| g.scale(scale));
            adam_step(&mut model.params_mut(), &grads, &mut adam)?;
        }
        let (val_loss, val_accuracy) = evaluate(&model, &encoded, &val)?;
        let stats = EpochAccuracy {
            epoch,
            train_loss: total / train.len() as f64,
            train_accuracy: correct as f64 / train.len() as f64,
            val_loss,
            val_accuracy,
        };
        if !stats.train_loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
        }
        if !val.is_empty() && best.as_ref().is_none_or(|(acc, _)| val_accuracy > *acc) {
            best = Some((val_accuracy, model.clone()));
        }
        on_epoch(&stats);
        history.push(stats);
    }
    Ok((best.map_or(model, |(_, m)| m), history))
}
