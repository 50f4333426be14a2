use crate::nn::tensor::Tensor;
use crate::{Error, Result};

/// Max pooling over `[C, H, W]`; ties resolve to the first element in scan
/// order so the backward pass is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaxPool2d {
    pub window: usize,
    pub stride: usize,
}

#[derive(Debug, Clone)]
pub struct PoolCache {
    input_shape: [usize; 3],
    pub(crate) argmax: Vec<usize>,
}

impl MaxPool2d {
    pub fn new(window: usize, stride: usize) -> Result<Self> {
        if window == 0 || stride == 0 {
            return Err(Error::invalid("pool window and stride must be positive"));
        }
        Ok(Self { window, stride })
    }

    pub fn output_shape(&self, input: &[usize]) -> Result<[usize; 3]> {
        if input.len() != 3 {
            return Err(Error::shape(format!("pool expects [C, H, W], got {input:?}")));
        }
        if self.window > input[1] || self.window > input[2] {
            return Err(Error::invalid(format!(
                "pool window {} exceeds spatial extent {}x{}",
                self.window, input[1], input[2]
            )));
        }
        Ok([
            input[0],
            (input[1] - self.window) / self.stride + 1,
            (input[2] - self.window) / self.stride + 1,
        ])
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.forward_cached(x)?.0)
    }

    pub fn forward_cached(&self, x: &Tensor) -> Result<(Tensor, PoolCache)> {
        let [c, oh, ow] = self.output_shape(x.shape())?;
        let (h, w) = (x.shape()[1], x.shape()[2]);
        let data = x.data();
        let mut out = Vec::with_capacity(c * oh * ow);
        let mut argmax = Vec::with_capacity(c * oh * ow);
        for ch in 0..c {
            let base = ch * h * w;
            for oy in 0..oh {
                for ox in 0..ow {
                    let mut best = base + oy * self.stride * w + ox * self.stride;
                    for dy in 0..self.window {
                        for dx in 0..self.window {
                            let idx = base + (oy * self.stride + dy) * w + ox * self.stride + dx;
                            if data[idx] > data[best] {
                                best = idx;
                            }
                        }
                    }
                    out.push(data[best]);
                    argmax.push(best);
                }
            }
        }
        Ok((
            Tensor::new(vec![c, oh, ow], out)?,
            PoolCache {
                input_shape: [c, h, w],
                argmax,
            },
        ))
    }

    pub fn backward(&self, cache: &PoolCache, grad_out: &Tensor) -> Result<Tensor> {
        if grad_out.len() != cache.argmax.len() {
            return Err(Error::shape("pool backward gradient size"));
        }
        let mut dx = Tensor::zeros(&cache.input_shape);
        let d = dx.data_mut();
        for (&idx, g) in cache.argmax.iter().zip(grad_out.data()) {
            d[idx] += g;
        }
        Ok(dx)
    }
}
