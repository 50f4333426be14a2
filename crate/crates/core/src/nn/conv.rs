//! 2-D convolution (cross-correlation, no kernel flip) via im2col + GEMM.

use std::ops::Range;

use crate::nn::gemm::{gemm, gemm_strided, MatRef};
use crate::nn::tensor::Tensor;
use crate::rng::Rng;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Conv2d {
    /// `[out_channels, in_channels, kernel, kernel]`
    pub weight: Tensor,
    pub bias: Tensor,
    pub stride: usize,
    pub padding: usize,
}

/// Forward activations kept for the backward pass. Only the input is kept;
/// the unfolded patches are rebuilt tile by tile on the way back.
#[derive(Debug, Clone)]
pub struct ConvCache {
    input: Tensor,
}

/// Unfolded patches per tile, in elements; sized to stay cache resident.
const TILE_ELEMS: usize = 1 << 16;

impl Conv2d {
    pub fn new(weight: Tensor, bias: Tensor, stride: usize, padding: usize) -> Result<Self> {
        let s = weight.shape();
        if s.len() != 4 || s[2] != s[3] {
            return Err(Error::shape(format!("conv weight must be [O, C, K, K], got {s:?}")));
        }
        if stride == 0 {
            return Err(Error::invalid("conv stride must be positive"));
        }
        bias.expect_shape(&[s[0]])?;
        Ok(Self {
            weight,
            bias,
            stride,
            padding,
        })
    }

    pub fn init(
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
        stride: usize,
        padding: usize,
        rng: &mut Rng,
    ) -> Self {
        let fan_in = in_channels * kernel * kernel;
        let bound = (6.0 / fan_in as f64).sqrt();
        Self {
            weight: Tensor::uniform(&[out_channels, in_channels, kernel, kernel], bound, rng),
            bias: Tensor::zeros(&[out_channels]),
            stride,
            padding,
        }
    }

    pub fn out_channels(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn in_channels(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn kernel(&self) -> usize {
        self.weight.shape()[2]
    }

    /// Output shape for a `[C, H, W]` input.
    pub fn output_shape(&self, input: &[usize]) -> Result<[usize; 3]> {
        if input.len() != 3 || input[0] != self.in_channels() {
            return Err(Error::shape(format!(
                "conv expects [{}, H, W], got {input:?}",
                self.in_channels()
            )));
        }
        let k = self.kernel();
        let (h, w) = (input[1] + 2 * self.padding, input[2] + 2 * self.padding);
        if k > h || k > w {
            return Err(Error::shape(format!(
                "kernel {k} larger than padded input {h}x{w}"
            )));
        }
        Ok([
            self.out_channels(),
            (h - k) / self.stride + 1,
            (w - k) / self.stride + 1,
        ])
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        Ok(self.forward_cached(x)?.0)
    }

    pub fn forward_cached(&self, x: &Tensor) -> Result<(Tensor, ConvCache)> {
        let out_shape = self.output_shape(x.shape())?;
        let input_shape = [x.shape()[0], x.shape()[1], x.shape()[2]];
        let kdim = self.in_channels() * self.kernel() * self.kernel();
        let [o, oh, ow] = out_shape;
        let npos = oh * ow;
        let mut out = vec![0.0; o * npos];
        for (c, b) in self.bias.data().iter().enumerate() {
            out[c * npos..(c + 1) * npos].fill(*b);
        }
        let mut cols = Vec::new();
        for rows in self.row_tiles(kdim, out_shape) {
            let n = rows.len() * ow;
            self.im2col(x.data(), input_shape, out_shape, rows.clone(), &mut cols);
            gemm_strided(
                MatRef::new(self.weight.data(), o, kdim),
                MatRef::new(&cols, kdim, n),
                1.0,
                &mut out[rows.start * ow..],
                npos,
            );
        }
        Ok((Tensor::new(out_shape.to_vec(), out)?, ConvCache { input: x.clone() }))
    }

    /// Accumulates kernel and bias gradients; returns the input gradient
    /// when `want_input_grad` is set.
    pub fn backward(
        &self,
        cache: &ConvCache,
        grad_out: &Tensor,
        grad_weight: &mut Tensor,
        grad_bias: &mut Tensor,
        want_input_grad: bool,
    ) -> Result<Option<Tensor>> {
        let x = &cache.input;
        let input_shape = [x.shape()[0], x.shape()[1], x.shape()[2]];
        let out_shape = self.output_shape(&input_shape)?;
        grad_out.expect_shape(&out_shape)?;
        grad_weight.expect_shape(self.weight.shape())?;
        grad_bias.expect_shape(self.bias.shape())?;
        let kdim = self.in_channels() * self.kernel() * self.kernel();
        let [o, oh, ow] = out_shape;
        let npos = oh * ow;
        let g = grad_out.data();

        for (c, gb) in grad_bias.data_mut().iter_mut().enumerate() {
            *gb += g[c * npos..(c + 1) * npos].iter().sum::<f64>();
        }
        let mut dx = want_input_grad.then(|| vec![0.0; x.len()]);
        let mut cols = Vec::new();
        let mut dcols = Vec::new();
        for rows in self.row_tiles(kdim, out_shape) {
            let n = rows.len() * ow;
            let dy = MatRef::strided(&g[rows.start * ow..], o, n, npos);
            self.im2col(x.data(), input_shape, out_shape, rows.clone(), &mut cols);
            // dW += dY · colsᵀ
            gemm(dy, MatRef::new(&cols, kdim, n).t(), 1.0, grad_weight.data_mut());
            if let Some(dx) = dx.as_mut() {
                // dcols = Wᵀ · dY, then scatter back.
                dcols.resize(kdim * n, 0.0);
                gemm(MatRef::new(self.weight.data(), o, kdim).t(), dy, 0.0, &mut dcols);
                self.col2im(&dcols, input_shape, out_shape, rows, dx);
            }
        }
        dx.map(|dx| Tensor::new(input_shape.to_vec(), dx)).transpose()
    }

    /// Output rows grouped so each tile's patch matrix stays small.
    fn row_tiles(&self, kdim: usize, out: [usize; 3]) -> impl Iterator<Item = Range<usize>> {
        let [_, oh, ow] = out;
        let step = (TILE_ELEMS / (kdim * ow).max(1)).max(1);
        (0..oh).step_by(step).map(move |r| r..(r + step).min(oh))
    }

    /// Patch matrix `[C·K·K, rows·OW]` for output rows `rows`, into `cols`.
    fn im2col(&self, x: &[f64], input: [usize; 3], out: [usize; 3], rows: Range<usize>, cols: &mut Vec<f64>) {
        let [c_in, h, w] = input;
        let [_, _, ow] = out;
        let k = self.kernel();
        let (s, p) = (self.stride as isize, self.padding as isize);
        let n = rows.len() * ow;
        cols.clear();
        cols.resize(c_in * k * k * n, 0.0);
        for c in 0..c_in {
            let plane = &x[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = ((c * k + ky) * k + kx) * n;
                    let dst = &mut cols[row..row + n];
                    for (t, oy) in rows.clone().enumerate() {
                        let iy = oy as isize * s + ky as isize - p;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let src = &plane[iy as usize * w..(iy as usize + 1) * w];
                        let line = &mut dst[t * ow..(t + 1) * ow];
                        if s == 1 && p == 0 {
                            line.copy_from_slice(&src[kx..kx + ow]);
                            continue;
                        }
                        for (ox, v) in line.iter_mut().enumerate() {
                            let ix = ox as isize * s + kx as isize - p;
                            if ix >= 0 && ix < w as isize {
                                *v = src[ix as usize];
                            }
                        }
                    }
                }
            }
        }
    }

    /// Adds the patch gradients of output rows `rows` into `x`.
    fn col2im(&self, cols: &[f64], input: [usize; 3], out: [usize; 3], rows: Range<usize>, x: &mut [f64]) {
        let [c_in, h, w] = input;
        let [_, _, ow] = out;
        let k = self.kernel();
        let (s, p) = (self.stride as isize, self.padding as isize);
        let n = rows.len() * ow;
        for c in 0..c_in {
            let plane = &mut x[c * h * w..(c + 1) * h * w];
            for ky in 0..k {
                for kx in 0..k {
                    let row = ((c * k + ky) * k + kx) * n;
                    let src = &cols[row..row + n];
                    for (t, oy) in rows.clone().enumerate() {
                        let iy = oy as isize * s + ky as isize - p;
                        if iy < 0 || iy >= h as isize {
                            continue;
                        }
                        let dst = &mut plane[iy as usize * w..(iy as usize + 1) * w];
                        let line = &src[t * ow..(t + 1) * ow];
                        if s == 1 && p == 0 {
                            for (d, v) in dst[kx..kx + ow].iter_mut().zip(line) {
                                *d += v;
                            }
                            continue;
                        }
                        for (ox, v) in line.iter().enumerate() {
                            let ix = ox as isize * s + kx as isize - p;
                            if ix >= 0 && ix < w as isize {
                                dst[ix as usize] += v;
                            }
                        }
                    }
                }
            }
        }
    }
}
