use crate::nn::tensor::Tensor;
use crate::rng::Rng;
use crate::{Error, Result};

/// Fully connected layer `y = W x + b`, `W` stored `[outputs, inputs]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Tensor,
    pub bias: Tensor,
}

impl Dense {
    pub fn new(weight: Tensor, bias: Tensor) -> Result<Self> {
        if weight.shape().len() != 2 {
            return Err(Error::shape("dense weight must be 2-D"));
        }
        bias.expect_shape(&[weight.shape()[0]])?;
        Ok(Self { weight, bias })
    }

    /// Fan-in scaled uniform initialization, zero bias.
    pub fn init(inputs: usize, outputs: usize, rng: &mut Rng) -> Self {
        let bound = (6.0 / inputs as f64).sqrt();
        Self {
            weight: Tensor::uniform(&[outputs, inputs], bound, rng),
            bias: Tensor::zeros(&[outputs]),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn outputs(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(Error::shape(format!(
                "dense layer expects {} inputs, got {}",
                self.inputs(),
                x.len()
            )));
        }
        let w = self.weight.data();
        let n = self.inputs();
        Ok(self
            .bias
            .data()
            .iter()
            .enumerate()
            .map(|(o, b)| b + dot(&w[o * n..(o + 1) * n], x))
            .collect())
    }

    /// Accumulates `dW += g xᵀ`, `db += g` and returns `Wᵀ g`.
    pub fn backward(
        &self,
        x: &[f64],
        grad_out: &[f64],
        grad_weight: &mut Tensor,
        grad_bias: &mut Tensor,
    ) -> Result<Vec<f64>> {
        let (outs, ins) = (self.outputs(), self.inputs());
        if x.len() != ins || grad_out.len() != outs {
            return Err(Error::shape("dense backward dimensions"));
        }
        grad_weight.expect_shape(self.weight.shape())?;
        grad_bias.expect_shape(self.bias.shape())?;
        let w = self.weight.data();
        let gw = grad_weight.data_mut();
        let mut grad_x = vec![0.0; ins];
        for (o, &g) in grad_out.iter().enumerate() {
            if g == 0.0 {
                continue;
            }
            let row = &mut gw[o * ins..(o + 1) * ins];
            for (r, xi) in row.iter_mut().zip(x) {
                *r += g * xi;
            }
            for (gx, wi) in grad_x.iter_mut().zip(&w[o * ins..(o + 1) * ins]) {
                *gx += g * wi;
            }
        }
        for (gb, g) in grad_bias.data_mut().iter_mut().zip(grad_out) {
            *gb += g;
        }
        Ok(grad_x)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators let the compiler vectorize the reduction.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * i + l] * b[4 * i + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in chunks * 4..a.len() {
        s += a[i] * b[i];
    }
    s
}
