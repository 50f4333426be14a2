//! Minibatch Adam training on normalized tip coordinates.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::nn::{adam_step, mse_loss, AdamState, Parameterized, Tensor};
use crate::regressor::model::{build_regressor, normalize_tip, FingertipRegressor, RegressorSpec};
use crate::rng::{derive_seed, seeded};
use crate::synth::FrameSample;
use crate::{Error, Result};

pub const MIN_TRAINING_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorTrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Fraction of the samples held out for validation.
    pub validation_fraction: f64,
    pub seed: u64,
}

impl Default for RegressorTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 8,
            learning_rate: 0.001,
            batch_size: 16,
            validation_fraction: 0.3,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochLoss {
    pub epoch: usize,
    /// Mean per-sample MSE over the epoch's minibatches.
    pub train_loss: f64,
    pub val_loss: f64,
}

pub fn sample_target(sample: &FrameSample) -> Tensor {
    let (x, y) = normalize_tip(sample.tip.0, sample.tip.1);
    Tensor::vector(vec![x, y])
}

pub fn mean_loss(model: &FingertipRegressor, samples: &[FrameSample]) -> Result<f64> {
    if samples.is_empty() {
        return Ok(f64::NAN);
    }
    let mut total = 0.0;
    for s in samples {
        let out = model.network.forward(&s.image)?;
        total += mse_loss(out.data(), sample_target(s).data())?.0;
    }
    Ok(total / samples.len() as f64)
}

pub fn train_regressor(
    spec: &RegressorSpec,
    data: &[FrameSample],
    config: &RegressorTrainConfig,
) -> Result<(FingertipRegressor, Vec<EpochLoss>)> {
    train_regressor_with(spec, data, config, |_| {})
}

/// Like [`train_regressor`], calling `on_epoch` after every epoch.
pub fn train_regressor_with(
    spec: &RegressorSpec,
    data: &[FrameSample],
    config: &RegressorTrainConfig,
    mut on_epoch: impl FnMut(&EpochLoss),
) -> Result<(FingertipRegressor, Vec<EpochLoss>)> {
    if data.is_empty() {
        return Err(Error::invalid("training set is empty"));
    }
    if data.len() < MIN_TRAINING_SAMPLES {
        return Err(Error::invalid(format!(
            "need at least {MIN_TRAINING_SAMPLES} samples, got {}",
            data.len()
        )));
    }
    if config.batch_size == 0 || !(0.0..1.0).contains(&config.validation_fraction) {
        return Err(Error::invalid("batch size must be positive and validation fraction in [0, 1)"));
    }
    if !(config.learning_rate >= 0.0 && config.learning_rate.is_finite()) {
        return Err(Error::invalid("learning rate must be finite and non-negative"));
    }
    let n_val = (data.len() as f64 * config.validation_fraction).round() as usize;
    let (train, val) = data.split_at(data.len() - n_val);

    let mut model = build_regressor(spec, derive_seed(config.seed, 1))?;
    let mut adam = AdamState::new(&model.network.params(), config.learning_rate);
    let mut rng = seeded(derive_seed(config.seed, 2));
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grads = model.network.zero_grads();
            for &i in batch {
                let (out, trace) = model.network.forward_train(&train[i].image)?;
                let (loss, g) = mse_loss(out.data(), sample_target(&train[i]).data())?;
                total += loss;
                let mut g = Tensor::vector(g);
                g.scale(1.0 / batch.len() as f64);
                model.network.backward(trace, &g, &mut grads)?;
            }
            adam_step(&mut model.network.params_mut(), &grads, &mut adam)?;
        }
        let stats = EpochLoss {
            epoch,
            train_loss: total / train.len() as f64,
            val_loss: mean_loss(&model, val)?,
        };
        if !stats.train_loss.is_finite() {
            return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
        }
        on_epoch(&stats);
        history.push(stats);
    }
    Ok((model, history))
}
