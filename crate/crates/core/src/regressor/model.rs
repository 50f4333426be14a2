//! The two-block convolutional tip regressor.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::nn::{LayerSpec, ModelCheckpoint, Network, Tensor};
use crate::synth::FRAME_SIZE;
use crate::{Error, Result};

pub const INPUT_SHAPE: [usize; 3] = [3, FRAME_SIZE, FRAME_SIZE];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressorSpec {
    /// Output channels of each conv layer, one list per block.
    pub blocks: Vec<Vec<usize>>,
    pub kernel: usize,
    pub pool: usize,
    /// Hidden widths of the dense head; a final width-2 layer is appended.
    pub dense_hidden: Vec<usize>,
}

impl Default for RegressorSpec {
    fn default() -> Self {
        Self {
            blocks: vec![vec![16, 16, 16], vec![32, 32, 32]],
            kernel: 3,
            pool: 2,
            dense_hidden: vec![256, 64],
        }
    }
}

impl RegressorSpec {
    /// Same topology with every conv layer `channels` wide.
    pub fn narrow(channels: usize, dense_hidden: Vec<usize>) -> Self {
        Self {
            blocks: vec![vec![channels; 3], vec![channels; 3]],
            dense_hidden,
            ..Self::default()
        }
    }

    pub fn layers(&self) -> Result<Vec<LayerSpec>> {
        if self.blocks.len() != 2 || self.blocks.iter().any(|b| b.len() != 3) {
            return Err(Error::invalid("regressor needs 2 blocks of 3 conv layers"));
        }
        if self.dense_hidden.len() != 2 {
            return Err(Error::invalid("regressor head needs 2 hidden dense layers"));
        }
        let mut layers = Vec::new();
        let mut channels = INPUT_SHAPE[0];
        for block in &self.blocks {
            for &out in block {
                layers.push(LayerSpec::Conv2d {
                    in_channels: channels,
                    out_channels: out,
                    kernel: self.kernel,
                    stride: 1,
                    padding: 0,
                });
                layers.push(LayerSpec::Relu);
                channels = out;
            }
            layers.push(LayerSpec::Maxpool2d {
                window: self.pool,
                stride: self.pool,
            });
        }
        let mut width = crate::nn::spec::infer_output_shape(&INPUT_SHAPE, &layers)?
            .iter()
            .product::<usize>();
        for &units in &self.dense_hidden {
            layers.push(LayerSpec::Dense { inputs: width, units });
            layers.push(LayerSpec::Relu);
            width = units;
        }
        layers.push(LayerSpec::Dense { inputs: width, units: 2 });
        crate::nn::spec::infer_output_shape(&INPUT_SHAPE, &layers)?;
        Ok(layers)
    }
}

/// Layer counts of a built regressor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StructureAudit {
    pub conv: usize,
    pub pool: usize,
    pub dense: usize,
    pub output_width: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FingertipRegressor {
    pub network: Network,
    pub seed: u64,
}

pub fn build_regressor(spec: &RegressorSpec, seed: u64) -> Result<FingertipRegressor> {
    Ok(FingertipRegressor {
        network: Network::from_spec(&INPUT_SHAPE, &spec.layers()?, seed)?,
        seed,
    })
}

impl FingertipRegressor {
    pub fn audit(&self) -> StructureAudit {
        let specs = self.network.specs();
        let count = |f: fn(&LayerSpec) -> bool| specs.iter().filter(|s| f(s)).count();
        StructureAudit {
            conv: count(|s| matches!(s, LayerSpec::Conv2d { .. })),
            pool: count(|s| matches!(s, LayerSpec::Maxpool2d { .. })),
            dense: count(|s| matches!(s, LayerSpec::Dense { .. })),
            output_width: self.network.output_shape().iter().product(),
        }
    }

    /// Tip in normalized `[0, 1]²` coordinates, clamped.
    pub fn predict_normalized(&self, image: &Tensor) -> Result<(f64, f64)> {
        let out = self.network.forward(image)?;
        let d = out.data();
        Ok((d[0].clamp(0.0, 1.0), d[1].clamp(0.0, 1.0)))
    }

    /// Tip in crop pixel coordinates.
    pub fn predict(&self, image: &Tensor) -> Result<(f64, f64)> {
        let (x, y) = self.predict_normalized(image)?;
        Ok(denormalize_tip(x, y))
    }

    pub fn checkpoint(&self) -> Result<ModelCheckpoint> {
        ModelCheckpoint::capture(&self.network, INPUT_SHAPE.to_vec(), self.network.specs(), self.seed)
    }

    pub fn from_checkpoint(ckpt: &ModelCheckpoint) -> Result<Self> {
        let mut network = Network::from_spec(&ckpt.input_shape, &ckpt.architecture, 0)?;
        if network.output_shape() != [2] {
            return Err(Error::Checkpoint("checkpoint is not a tip regressor".into()));
        }
        network.load_params(ckpt.tensors())?;
        Ok(Self {
            network,
            seed: ckpt.rng_seed,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.checkpoint()?.save(path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_checkpoint(&ModelCheckpoint::load(path)?)
    }
}

pub fn normalize_tip(x: f64, y: f64) -> (f64, f64) {
    (x / FRAME_SIZE as f64, y / FRAME_SIZE as f64)
}

pub fn denormalize_tip(x: f64, y: f64) -> (f64, f64) {
    (x * FRAME_SIZE as f64, y * FRAME_SIZE as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Parameterized;

    #[test]
    fn default_structure() {
        let r = build_regressor(&RegressorSpec::default(), 1).unwrap();
        assert_eq!(
            r.audit(),
            StructureAudit {
                conv: 6,
                pool: 2,
                dense: 3,
                output_width: 2
            }
        );
        let specs = r.network.specs();
        assert!(specs.contains(&LayerSpec::Dense { inputs: 32 * 20 * 20, units: 256 }));
    }

    #[test]
    fn zeros_give_finite_prediction() {
        let r = build_regressor(&RegressorSpec::default(), 1).unwrap();
        let (x, y) = r.predict(&Tensor::zeros(&INPUT_SHAPE)).unwrap();
        assert!(x.is_finite() && y.is_finite());
        assert!((0.0..=99.0).contains(&x) && (0.0..=99.0).contains(&y));
    }

    #[test]
    fn inconsistent_specs_rejected() {
        let mut spec = RegressorSpec::default();
        spec.blocks[1].pop();
        assert!(build_regressor(&spec, 0).is_err());
        let spec = RegressorSpec {
            kernel: 40,
            ..RegressorSpec::default()
        };
        assert!(build_regressor(&spec, 0).is_err());
        let spec = RegressorSpec {
            dense_hidden: vec![8],
            ..RegressorSpec::default()
        };
        assert!(build_regressor(&spec, 0).is_err());
        let mut spec = RegressorSpec::default();
        spec.blocks[0][1] = 0;
        assert!(build_regressor(&spec, 0).is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let r = build_regressor(&RegressorSpec::narrow(4, vec![8, 8]), 5).unwrap();
        let back = FingertipRegressor::from_checkpoint(&r.checkpoint().unwrap()).unwrap();
        assert_eq!(back.network.params(), r.network.params());
        assert_eq!(back.seed, 5);
    }
}
