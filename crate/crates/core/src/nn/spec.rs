use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Architecture description of one layer, as stored in checkpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LayerSpec {
    Dense {
        inputs: usize,
        units: usize,
    },
    Conv2d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
    },
    Maxpool2d {
        window: usize,
        stride: usize,
    },
    Lstm {
        inputs: usize,
        units: usize,
    },
    Bilstm {
        inputs: usize,
        units: usize,
    },
    Relu,
    Softmax,
}

impl LayerSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = match *self {
            LayerSpec::Dense { inputs, units }
            | LayerSpec::Lstm { inputs, units }
            | LayerSpec::Bilstm { inputs, units } => inputs > 0 && units > 0,
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                ..
            } => in_channels > 0 && out_channels > 0 && kernel > 0 && stride > 0,
            LayerSpec::Maxpool2d { window, stride } => window > 0 && stride > 0,
            LayerSpec::Relu | LayerSpec::Softmax => true,
        };
        if positive {
            Ok(())
        } else {
            Err(Error::invalid(format!("non-positive hyperparameter in {self:?}")))
        }
    }

    /// Output shape of a feed-forward layer for `input`; rejects layers that
    /// do not compose with it. Recurrent layers consume `[T, inputs]` and
    /// emit `[units]`.
    pub fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        self.validate()?;
        let mismatch = || Error::shape(format!("{self:?} cannot follow shape {input:?}"));
        match *self {
            LayerSpec::Dense { inputs, units } => {
                if input.iter().product::<usize>() != inputs {
                    return Err(mismatch());
                }
                Ok(vec![units])
            }
            LayerSpec::Conv2d {
                in_channels,
                out_channels,
                kernel,
                stride,
                padding,
            } => {
                if input.len() != 3 || input[0] != in_channels {
                    return Err(mismatch());
                }
                let (h, w) = (input[1] + 2 * padding, input[2] + 2 * padding);
                if kernel > h || kernel > w {
                    return Err(mismatch());
                }
                Ok(vec![out_channels, (h - kernel) / stride + 1, (w - kernel) / stride + 1])
            }
            LayerSpec::Maxpool2d { window, stride } => {
                if input.len() != 3 || window > input[1] || window > input[2] {
                    return Err(mismatch());
                }
                Ok(vec![input[0], (input[1] - window) / stride + 1, (input[2] - window) / stride + 1])
            }
            LayerSpec::Lstm { inputs, units } | LayerSpec::Bilstm { inputs, units } => {
                if input.len() != 2 || input[1] != inputs {
                    return Err(mismatch());
                }
                Ok(vec![units])
            }
            LayerSpec::Relu | LayerSpec::Softmax => Ok(input.to_vec()),
        }
    }
}

/// Checks that `layers` compose starting from `input` and returns the final
/// output shape.
pub fn infer_output_shape(input: &[usize], layers: &[LayerSpec]) -> Result<Vec<usize>> {
    layers
        .iter()
        .try_fold(input.to_vec(), |shape, layer| layer.output_shape(&shape))
}
