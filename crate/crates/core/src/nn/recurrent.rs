//! Recurrent sequence classifiers: a Bi-LSTM with multiplicative fusion of
//! the two directions' final hidden states, and a unidirectional LSTM
//! baseline sharing the same head.
//!
//! For 2-D inputs, 30 units and 10 classes the Bi-LSTM holds
//! `2 · 4·30·(2+30+1) + (30·10 + 10) = 8,230` trainable parameters.

use crate::nn::dense::Dense;
use crate::nn::loss::{softmax, softmax_cross_entropy};
use crate::nn::lstm::LstmParams;
use crate::nn::model::Parameterized;
use crate::nn::spec::LayerSpec;
use crate::nn::tensor::Tensor;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentClassifier {
    forward: LstmParams,
    /// Present for the bidirectional variant; runs over the reversed sequence.
    backward: Option<LstmParams>,
    head: Dense,
}

impl RecurrentClassifier {
    pub fn bilstm(inputs: usize, units: usize, classes: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let forward = LstmParams::init(inputs, units, &mut rng);
        let backward = LstmParams::init(inputs, units, &mut rng);
        Self {
            forward,
            backward: Some(backward),
            head: Dense::init(units, classes, &mut rng),
        }
    }

    pub fn lstm(inputs: usize, units: usize, classes: usize, seed: u64) -> Self {
        let mut rng = seeded(seed);
        let forward = LstmParams::init(inputs, units, &mut rng);
        Self {
            forward,
            backward: None,
            head: Dense::init(units, classes, &mut rng),
        }
    }

    /// All-zero parameters; every input maps to uniform probabilities.
    pub fn zeros(inputs: usize, units: usize, classes: usize, bidirectional: bool) -> Self {
        Self {
            forward: LstmParams::zeros(inputs, units),
            backward: bidirectional.then(|| LstmParams::zeros(inputs, units)),
            head: Dense::new(Tensor::zeros(&[classes, units]), Tensor::zeros(&[classes]))
                .expect("consistent shapes"),
        }
    }

    pub fn is_bidirectional(&self) -> bool {
        self.backward.is_some()
    }

    pub fn inputs(&self) -> usize {
        self.forward.inputs()
    }

    pub fn units(&self) -> usize {
        self.forward.units()
    }

    pub fn classes(&self) -> usize {
        self.head.outputs()
    }

    pub fn architecture(&self) -> Vec<LayerSpec> {
        let (inputs, units) = (self.inputs(), self.units());
        let recurrent = if self.is_bidirectional() {
            LayerSpec::Bilstm { inputs, units }
        } else {
            LayerSpec::Lstm { inputs, units }
        };
        vec![
            recurrent,
            LayerSpec::Dense {
                inputs: units,
                units: self.classes(),
            },
            LayerSpec::Softmax,
        ]
    }

    /// Rebuilds a classifier from an architecture list and parameters in
    /// [`Parameterized::params`] order.
    pub fn from_parts(architecture: &[LayerSpec], params: Vec<Tensor>) -> Result<Self> {
        let (bidirectional, inputs, units, classes) = match architecture {
            [LayerSpec::Bilstm { inputs, units }, LayerSpec::Dense { inputs: d_in, units: classes }, LayerSpec::Softmax]
                if d_in == units =>
            {
                (true, *inputs, *units, *classes)
            }
            [LayerSpec::Lstm { inputs, units }, LayerSpec::Dense { inputs: d_in, units: classes }, LayerSpec::Softmax]
                if d_in == units =>
            {
                (false, *inputs, *units, *classes)
            }
            other => {
                return Err(Error::Checkpoint(format!(
                    "not a recurrent classifier architecture: {other:?}"
                )))
            }
        };
        let mut model = Self::zeros(inputs, units, classes, bidirectional);
        let slots = model.params_mut();
        if slots.len() != params.len() {
            return Err(Error::Checkpoint(format!(
                "expected {} parameter tensors, found {}",
                slots.len(),
                params.len()
            )));
        }
        for (slot, value) in slots.into_iter().zip(params) {
            value.expect_shape(slot.shape())?;
            *slot = value;
        }
        Ok(model)
    }

    fn check_sequence(&self, xs: &[Vec<f64>]) -> Result<()> {
        if xs.is_empty() {
            return Err(Error::invalid("empty sequence"));
        }
        if let Some((t, x)) = xs.iter().enumerate().find(|(_, x)| x.len() != self.inputs()) {
            return Err(Error::shape(format!(
                "step {t} has {} features, expected {}",
                x.len(),
                self.inputs()
            )));
        }
        Ok(())
    }

    fn features(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        let hf = self.forward.final_hidden(xs, false)?;
        Ok(match &self.backward {
            Some(bw) => {
                let hb = bw.final_hidden(xs, true)?;
                hf.iter().zip(&hb).map(|(a, b)| a * b).collect()
            }
            None => hf,
        })
    }

    /// Unnormalized class scores.
    pub fn scores(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        self.check_sequence(xs)?;
        let scores = self.head.forward(&self.features(xs)?)?;
        Tensor::vector(scores.clone()).ensure_finite("scores")?;
        Ok(scores)
    }

    pub fn probabilities(&self, xs: &[Vec<f64>]) -> Result<Vec<f64>> {
        softmax(&self.scores(xs)?)
    }

    /// Cross-entropy loss for one sequence; parameter gradients are
    /// accumulated into `grads` (in [`Parameterized::params`] order).
    /// Returns the loss and the predicted class.
    pub fn accumulate_gradients(
        &self,
        xs: &[Vec<f64>],
        target: usize,
        grads: &mut [Tensor],
    ) -> Result<(f64, usize)> {
        self.check_sequence(xs)?;
        let expected = if self.is_bidirectional() { 8 } else { 5 };
        if grads.len() != expected {
            return Err(Error::shape(format!(
                "expected {expected} gradient tensors, got {}",
                grads.len()
            )));
        }
        let (hf, fw_caches) = self.forward.run(xs, false)?;
        let back = match &self.backward {
            Some(bw) => Some(bw.run(xs, true)?),
            None => None,
        };
        let features: Vec<f64> = match &back {
            Some((hb, _)) => hf.iter().zip(hb).map(|(a, b)| a * b).collect(),
            None => hf.clone(),
        };
        let scores = self.head.forward(&features)?;
        let (loss, dscores) = softmax_cross_entropy(&scores, target)?;
        let predicted = argmax(&scores);

        let (lstm_grads, head_grads) = grads.split_at_mut(grads.len() - 2);
        let [gw, gb] = head_grads else { unreachable!() };
        let dfeat = self.head.backward(&features, &dscores, gw, gb)?;
        match (&self.backward, back) {
            (Some(bw), Some((hb, bw_caches))) => {
                let dhf: Vec<f64> = dfeat.iter().zip(&hb).map(|(d, b)| d * b).collect();
                let dhb: Vec<f64> = dfeat.iter().zip(&hf).map(|(d, f)| d * f).collect();
                let (fw_g, bw_g) = lstm_grads.split_at_mut(3);
                self.forward.backward(&fw_caches, &dhf, fw_g)?;
                bw.backward(&bw_caches, &dhb, bw_g)?;
            }
            _ => self.forward.backward(&fw_caches, &dfeat, lstm_grads)?,
        }
        Ok((loss, predicted))
    }

    /// Loss only, for finite-difference checks.
    pub fn loss(&self, xs: &[Vec<f64>], target: usize) -> Result<f64> {
        Ok(softmax_cross_entropy(&self.scores(xs)?, target)?.0)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

impl Parameterized for RecurrentClassifier {
    fn param_names(&self) -> Vec<String> {
        let mut names: Vec<String> = ["w_input", "w_hidden", "bias"]
            .iter()
            .map(|n| format!("forward.{n}"))
            .collect();
        if self.backward.is_some() {
            names.extend(["w_input", "w_hidden", "bias"].iter().map(|n| format!("backward.{n}")));
        }
        names.push("head.weight".into());
        names.push("head.bias".into());
        names
    }

    fn params(&self) -> Vec<&Tensor> {
        let mut out = vec![&self.forward.w_input, &self.forward.w_hidden, &self.forward.bias];
        if let Some(bw) = &self.backward {
            out.extend([&bw.w_input, &bw.w_hidden, &bw.bias]);
        }
        out.push(&self.head.weight);
        out.push(&self.head.bias);
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = vec![
            &mut self.forward.w_input,
            &mut self.forward.w_hidden,
            &mut self.forward.bias,
        ];
        if let Some(bw) = &mut self.backward {
            out.extend([&mut bw.w_input, &mut bw.w_hidden, &mut bw.bias]);
        }
        out.push(&mut self.head.weight);
        out.push(&mut self.head.bias);
        out
    }
}
