//! Sequential feed-forward network over conv / pool / dense / ReLU layers.

use crate::nn::conv::{Conv2d, ConvCache};
use crate::nn::dense::Dense;
use crate::nn::model::Parameterized;
use crate::nn::pool::{MaxPool2d, PoolCache};
use crate::nn::spec::{infer_output_shape, LayerSpec};
use crate::nn::tensor::Tensor;
use crate::rng::seeded;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Conv2d(Conv2d),
    MaxPool2d(MaxPool2d),
    Dense(Dense),
    Relu,
}

impl Layer {
    pub fn spec(&self) -> LayerSpec {
        match self {
            Layer::Conv2d(c) => LayerSpec::Conv2d {
                in_channels: c.in_channels(),
                out_channels: c.out_channels(),
                kernel: c.kernel(),
                stride: c.stride,
                padding: c.padding,
            },
            Layer::MaxPool2d(p) => LayerSpec::Maxpool2d {
                window: p.window,
                stride: p.stride,
            },
            Layer::Dense(d) => LayerSpec::Dense {
                inputs: d.inputs(),
                units: d.outputs(),
            },
            Layer::Relu => LayerSpec::Relu,
        }
    }

    fn param_count(&self) -> usize {
        match self {
            Layer::Conv2d(_) | Layer::Dense(_) => 2,
            _ => 0,
        }
    }
}

#[derive(Debug)]
enum Cache {
    Conv(ConvCache),
    Pool(PoolCache),
    Dense { input: Tensor },
    Relu { output: Tensor },
}

/// Activations recorded by [`Network::forward_train`].
#[derive(Debug)]
pub struct Trace {
    caches: Vec<Cache>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    input_shape: Vec<usize>,
    layers: Vec<Layer>,
}

impl Network {
    /// Builds and initializes a network; rejects specs that do not compose
    /// or contain recurrent / softmax layers.
    pub fn from_spec(input_shape: &[usize], specs: &[LayerSpec], seed: u64) -> Result<Self> {
        infer_output_shape(input_shape, specs)?;
        let mut rng = seeded(seed);
        let layers = specs
            .iter()
            .map(|spec| {
                Ok(match *spec {
                    LayerSpec::Conv2d {
                        in_channels,
                        out_channels,
                        kernel,
                        stride,
                        padding,
                    } => Layer::Conv2d(Conv2d::init(
                        in_channels,
                        out_channels,
                        kernel,
                        stride,
                        padding,
                        &mut rng,
                    )),
                    LayerSpec::Maxpool2d { window, stride } => {
                        Layer::MaxPool2d(MaxPool2d::new(window, stride)?)
                    }
                    LayerSpec::Dense { inputs, units } => Layer::Dense(Dense::init(inputs, units, &mut rng)),
                    LayerSpec::Relu => Layer::Relu,
                    other => {
                        return Err(Error::invalid(format!(
                            "{other:?} is not supported in a feed-forward network"
                        )))
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            input_shape: input_shape.to_vec(),
            layers,
        })
    }

    pub fn input_shape(&self) -> &[usize] {
        &self.input_shape
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn specs(&self) -> Vec<LayerSpec> {
        self.layers.iter().map(Layer::spec).collect()
    }

    pub fn output_shape(&self) -> Vec<usize> {
        infer_output_shape(&self.input_shape, &self.specs()).expect("validated at construction")
    }

    /// Replaces every parameter tensor, checking shapes.
    pub fn load_params(&mut self, params: Vec<Tensor>) -> Result<()> {
        let slots = self.params_mut();
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
        Ok(())
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        x.expect_shape(&self.input_shape)?;
        let mut h = x.clone();
        for layer in &self.layers {
            h = match layer {
                Layer::Conv2d(c) => c.forward(&h)?,
                Layer::MaxPool2d(p) => p.forward(&h)?,
                Layer::Dense(d) => Tensor::vector(d.forward(h.data())?),
                Layer::Relu => relu(h),
            };
        }
        h.ensure_finite("network output")?;
        Ok(h)
    }

    pub fn forward_train(&self, x: &Tensor) -> Result<(Tensor, Trace)> {
        x.expect_shape(&self.input_shape)?;
        let mut h = x.clone();
        let mut caches = Vec::with_capacity(self.layers.len());
        for layer in &self.layers {
            h = match layer {
                Layer::Conv2d(c) => {
                    let (y, cache) = c.forward_cached(&h)?;
                    caches.push(Cache::Conv(cache));
                    y
                }
                Layer::MaxPool2d(p) => {
                    let (y, cache) = p.forward_cached(&h)?;
                    caches.push(Cache::Pool(cache));
                    y
                }
                Layer::Dense(d) => {
                    let y = Tensor::vector(d.forward(h.data())?);
                    caches.push(Cache::Dense { input: h });
                    y
                }
                Layer::Relu => {
                    let y = relu(h);
                    caches.push(Cache::Relu { output: y.clone() });
                    y
                }
            };
        }
        h.ensure_finite("network output")?;
        Ok((h, Trace { caches }))
    }

    /// Hash of the linear region `x` falls in: the ReLU on/off pattern and
    /// the max-pool winners. Finite differences across a change of region
    /// straddle a kink and do not estimate the gradient.
    pub fn activation_signature(&self, x: &Tensor) -> Result<u64> {
        use std::hash::{Hash, Hasher};
        let (_, trace) = self.forward_train(x)?;
        let mut h = std::collections::hash_map::DefaultHasher::new();
        for cache in &trace.caches {
            match cache {
                Cache::Relu { output } => output.data().iter().for_each(|v| (*v > 0.0).hash(&mut h)),
                Cache::Pool(p) => p.argmax.hash(&mut h),
                _ => {}
            }
        }
        Ok(h.finish())
    }

    /// Accumulates parameter gradients for one sample into `grads`
    /// ([`Parameterized::params`] order). Returns the input gradient, except
    /// when the first layer is a convolution: its input gradient is never
    /// needed in training and is reported as zeros.
    pub fn backward(&self, trace: Trace, grad_out: &Tensor, grads: &mut [Tensor]) -> Result<Tensor> {
        if grads.len() != self.params().len() {
            return Err(Error::shape("gradient list length"));
        }
        if trace.caches.len() != self.layers.len() {
            return Err(Error::invalid("trace does not belong to this network"));
        }
        let mut slot = grads.len();
        let mut g = grad_out.clone();
        for (i, (layer, cache)) in self.layers.iter().zip(trace.caches).enumerate().rev() {
            slot -= layer.param_count();
            g = match (layer, cache) {
                (Layer::Conv2d(c), Cache::Conv(cache)) => {
                    let (gw, gb) = pair(&mut grads[slot..slot + 2]);
                    match c.backward(&cache, &g, gw, gb, i > 0)? {
                        Some(dx) => dx,
                        None => Tensor::zeros(&self.input_shape),
                    }
                }
                (Layer::MaxPool2d(p), Cache::Pool(cache)) => p.backward(&cache, &g)?,
                (Layer::Dense(d), Cache::Dense { input }) => {
                    let (gw, gb) = pair(&mut grads[slot..slot + 2]);
                    let dx = d.backward(input.data(), g.data(), gw, gb)?;
                    Tensor::new(input.shape().to_vec(), dx)?
                }
                (Layer::Relu, Cache::Relu { output }) => {
                    let mut dx = g;
                    for (d, y) in dx.data_mut().iter_mut().zip(output.data()) {
                        if *y <= 0.0 {
                            *d = 0.0;
                        }
                    }
                    dx
                }
                _ => return Err(Error::invalid("trace does not belong to this network")),
            };
        }
        Ok(g)
    }
}

fn pair(slots: &mut [Tensor]) -> (&mut Tensor, &mut Tensor) {
    let (a, b) = slots.split_at_mut(1);
    (&mut a[0], &mut b[0])
}

fn relu(mut t: Tensor) -> Tensor {
    for v in t.data_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    t
}

impl Parameterized for Network {
    fn param_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            if layer.param_count() > 0 {
                names.push(format!("layer{i}.weight"));
                names.push(format!("layer{i}.bias"));
            }
        }
        names
    }

    fn params(&self) -> Vec<&Tensor> {
        let mut out = Vec::new();
        for layer in &self.layers {
            match layer {
                Layer::Conv2d(c) => out.extend([&c.weight, &c.bias]),
                Layer::Dense(d) => out.extend([&d.weight, &d.bias]),
                _ => {}
            }
        }
        out
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        let mut out = Vec::new();
        for layer in &mut self.layers {
            match layer {
                Layer::Conv2d(c) => out.extend([&mut c.weight, &mut c.bias]),
                Layer::Dense(d) => out.extend([&mut d.weight, &mut d.bias]),
                _ => {}
            }
        }
        out
    }
}
