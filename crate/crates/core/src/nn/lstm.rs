//! LSTM cell with backpropagation through time.
//!
//! Gate layout in the stacked weight matrices is `[input, forget, candidate,
//! output]`, each block `units` rows tall. A single bias vector is used per
//! gate, giving `4 · units · (inputs + units + 1)` parameters.

use crate::nn::dense::dot;
use crate::nn::tensor::Tensor;
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    /// `[4·units, inputs]`
    pub w_input: Tensor,
    /// `[4·units, units]`
    pub w_hidden: Tensor,
    /// `[4·units]`
    pub bias: Tensor,
}

/// Everything one step needs to run backwards.
#[derive(Debug, Clone)]
pub struct StepCache {
    x: Vec<f64>,
    h_prev: Vec<f64>,
    c_prev: Vec<f64>,
    /// Activated gates `[i, f, g, o]`, concatenated.
    gates: Vec<f64>,
    tanh_c: Vec<f64>,
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LstmParams {
    pub fn new(w_input: Tensor, w_hidden: Tensor, bias: Tensor) -> Result<Self> {
        let units = bias.len() / 4;
        if bias.shape().len() != 1 || bias.len() % 4 != 0 || units == 0 {
            return Err(Error::shape("lstm bias must have length 4·units"));
        }
        if w_input.shape().len() != 2 || w_input.shape()[0] != 4 * units {
            return Err(Error::shape(format!(
                "lstm input weight must be [{}, inputs], got {:?}",
                4 * units,
                w_input.shape()
            )));
        }
        w_hidden.expect_shape(&[4 * units, units])?;
        Ok(Self {
            w_input,
            w_hidden,
            bias,
        })
    }

    /// Uniform `±1/√units` weights, zero bias except a forget-gate bias of 1.
    pub fn init(inputs: usize, units: usize, rng: &mut Rng) -> Self {
        let bound = 1.0 / (units as f64).sqrt();
        let mut bias = Tensor::zeros(&[4 * units]);
        bias.data_mut()[units..2 * units].fill(1.0);
        Self {
            w_input: Tensor::uniform(&[4 * units, inputs], bound, rng),
            w_hidden: Tensor::uniform(&[4 * units, units], bound, rng),
            bias,
        }
    }

    pub fn zeros(inputs: usize, units: usize) -> Self {
        Self {
            w_input: Tensor::zeros(&[4 * units, inputs]),
            w_hidden: Tensor::zeros(&[4 * units, units]),
            bias: Tensor::zeros(&[4 * units]),
        }
    }

    pub fn units(&self) -> usize {
        self.bias.len() / 4
    }

    pub fn inputs(&self) -> usize {
        self.w_input.shape()[1]
    }

    pub fn num_params(&self) -> usize {
        self.w_input.len() + self.w_hidden.len() + self.bias.len()
    }

    fn check_dims(&self, x: &[f64], h: &[f64], c: &[f64]) -> Result<()> {
        let u = self.units();
        if x.len() != self.inputs() || h.len() != u || c.len() != u {
            return Err(Error::shape(format!(
                "lstm step with {} inputs / {} units got x={}, h={}, c={}",
                self.inputs(),
                u,
                x.len(),
                h.len(),
                c.len()
            )));
        }
        Ok(())
    }

    /// One time step; returns `(h_t, c_t)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_dims(x, h_prev, c_prev)?;
        let cache = self.step_unchecked(x, h_prev, c_prev);
        let h = self.hidden_from(&cache);
        Ok((h, self.cell_from(&cache)))
    }

    fn step_unchecked(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> StepCache {
        let u = self.units();
        let (ni, wi, wh, b) = (
            self.inputs(),
            self.w_input.data(),
            self.w_hidden.data(),
            self.bias.data(),
        );
        let mut gates = Vec::with_capacity(4 * u);
        for r in 0..4 * u {
            let z = b[r] + dot(&wi[r * ni..(r + 1) * ni], x) + dot(&wh[r * u..(r + 1) * u], h_prev);
            gates.push(if (2 * u..3 * u).contains(&r) {
                z.tanh()
            } else {
                sigmoid(z)
            });
        }
        let tanh_c = (0..u)
            .map(|j| (gates[u + j] * c_prev[j] + gates[j] * gates[2 * u + j]).tanh())
            .collect();
        StepCache {
            x: x.to_vec(),
            h_prev: h_prev.to_vec(),
            c_prev: c_prev.to_vec(),
            gates,
            tanh_c,
        }
    }

    fn cell_from(&self, s: &StepCache) -> Vec<f64> {
        let u = self.units();
        (0..u)
            .map(|j| s.gates[u + j] * s.c_prev[j] + s.gates[j] * s.gates[2 * u + j])
            .collect()
    }

    fn hidden_from(&self, s: &StepCache) -> Vec<f64> {
        let u = self.units();
        (0..u).map(|j| s.gates[3 * u + j] * s.tanh_c[j]).collect()
    }

    /// Runs the cell over `xs` (reversed when `reverse` is set) from zero
    /// state and returns the final hidden state plus per-step caches in
    /// processing order.
    pub fn run(&self, xs: &[Vec<f64>], reverse: bool) -> Result<(Vec<f64>, Vec<StepCache>)> {
        if xs.is_empty() {
            return Err(Error::invalid("lstm over an empty sequence"));
        }
        let u = self.units();
        let mut h = vec![0.0; u];
        let mut c = vec![0.0; u];
        let mut caches = Vec::with_capacity(xs.len());
        let order: Box<dyn Iterator<Item = &Vec<f64>>> = if reverse {
            Box::new(xs.iter().rev())
        } else {
            Box::new(xs.iter())
        };
        for x in order {
            self.check_dims(x, &h, &c)?;
            let cache = self.step_unchecked(x, &h, &c);
            c = self.cell_from(&cache);
            h = self.hidden_from(&cache);
            caches.push(cache);
        }
        Ok((h, caches))
    }

    /// Final hidden state only, without keeping caches.
    pub fn final_hidden(&self, xs: &[Vec<f64>], reverse: bool) -> Result<Vec<f64>> {
        if xs.is_empty() {
            return Err(Error::invalid("lstm over an empty sequence"));
        }
        let u = self.units();
        let ni = self.inputs();
        let (wi, wh, b) = (self.w_input.data(), self.w_hidden.data(), self.bias.data());
        let mut h = vec![0.0; u];
        let mut c = vec![0.0; u];
        let mut z = vec![0.0; 4 * u];
        for k in 0..xs.len() {
            let x = &xs[if reverse { xs.len() - 1 - k } else { k }];
            self.check_dims(x, &h, &c)?;
            for (r, zr) in z.iter_mut().enumerate() {
                *zr = b[r] + dot(&wi[r * ni..(r + 1) * ni], x) + dot(&wh[r * u..(r + 1) * u], &h);
            }
            for j in 0..u {
                let (i, f, g, o) = (sigmoid(z[j]), sigmoid(z[u + j]), z[2 * u + j].tanh(), sigmoid(z[3 * u + j]));
                c[j] = f * c[j] + i * g;
                h[j] = o * c[j].tanh();
            }
        }
        Ok(h)
    }

    /// Backpropagation through time given the gradient of the loss with
    /// respect to the final hidden state. Gradients are accumulated into
    /// `grads`, ordered `[w_input, w_hidden, bias]`.
    pub fn backward(&self, caches: &[StepCache], grad_final_h: &[f64], grads: &mut [Tensor]) -> Result<()> {
        let u = self.units();
        let ni = self.inputs();
        if grad_final_h.len() != u {
            return Err(Error::shape("lstm backward hidden gradient length"));
        }
        let [gw_input, gw_hidden, g_bias] = grads else {
            return Err(Error::shape("lstm backward expects three gradient tensors"));
        };
        gw_input.expect_shape(self.w_input.shape())?;
        gw_hidden.expect_shape(self.w_hidden.shape())?;
        g_bias.expect_shape(self.bias.shape())?;
        let wh = self.w_hidden.data();
        let mut dh = grad_final_h.to_vec();
        let mut dc = vec![0.0; u];
        let mut dz = vec![0.0; 4 * u];
        for s in caches.iter().rev() {
            for j in 0..u {
                let (i, f, g, o) = (s.gates[j], s.gates[u + j], s.gates[2 * u + j], s.gates[3 * u + j]);
                let tc = s.tanh_c[j];
                let dcj = dc[j] + dh[j] * o * (1.0 - tc * tc);
                dz[j] = dcj * g * i * (1.0 - i);
                dz[u + j] = dcj * s.c_prev[j] * f * (1.0 - f);
                dz[2 * u + j] = dcj * i * (1.0 - g * g);
                dz[3 * u + j] = dh[j] * tc * o * (1.0 - o);
                dc[j] = dcj * f;
            }
            let gwi = gw_input.data_mut();
            let gwh = gw_hidden.data_mut();
            let gb = g_bias.data_mut();
            for (r, &d) in dz.iter().enumerate() {
                gb[r] += d;
                for (g, x) in gwi[r * ni..(r + 1) * ni].iter_mut().zip(&s.x) {
                    *g += d * x;
                }
                for (g, h) in gwh[r * u..(r + 1) * u].iter_mut().zip(&s.h_prev) {
                    *g += d * h;
                }
            }
            dh.fill(0.0);
            for (r, &d) in dz.iter().enumerate() {
                for (acc, w) in dh.iter_mut().zip(&wh[r * u..(r + 1) * u]) {
                    *acc += d * w;
                }
            }
        }
        Ok(())
    }
}
