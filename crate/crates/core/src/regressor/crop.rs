//! Box crop with bilinear resampling to the regressor's input size.

use crate::nn::Tensor;
use crate::synth::FRAME_SIZE;
use crate::{Error, Result};

/// Axis-aligned box in source pixel units: `[x0, x0 + width) × [y0, y0 + height)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropBox {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

/// Affine map between crop pixels and source pixels (pixel centers at
/// integer coordinates on both sides).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CropMapping {
    pub x0: f64,
    pub y0: f64,
    pub scale_x: f64,
    pub scale_y: f64,
}

impl CropMapping {
    pub fn to_source(&self, u: f64, v: f64) -> (f64, f64) {
        (
            self.x0 + (u + 0.5) * self.scale_x - 0.5,
            self.y0 + (v + 0.5) * self.scale_y - 0.5,
        )
    }

    pub fn to_crop(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x + 0.5 - self.x0) / self.scale_x - 0.5,
            (y + 0.5 - self.y0) / self.scale_y - 0.5,
        )
    }
}

/// Crops `image` (`[C, H, W]`) to `bbox` clipped to the image and resizes the
/// result to `FRAME_SIZE × FRAME_SIZE`.
pub fn crop_and_resize(image: &Tensor, bbox: CropBox) -> Result<(Tensor, CropMapping)> {
    resize_region(image, bbox, FRAME_SIZE, FRAME_SIZE)
}

pub fn resize_region(image: &Tensor, bbox: CropBox, out_h: usize, out_w: usize) -> Result<(Tensor, CropMapping)> {
    let s = image.shape();
    if s.len() != 3 || s[1] == 0 || s[2] == 0 {
        return Err(Error::shape(format!("image must be [C, H, W], got {s:?}")));
    }
    if out_h == 0 || out_w == 0 {
        return Err(Error::invalid("output size must be positive"));
    }
    let (c, h, w) = (s[0], s[1], s[2]);
    let vals = [bbox.x0, bbox.y0, bbox.width, bbox.height];
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("crop box".into()));
    }
    let x0 = bbox.x0.max(0.0);
    let y0 = bbox.y0.max(0.0);
    let x1 = (bbox.x0 + bbox.width).min(w as f64);
    let y1 = (bbox.y0 + bbox.height).min(h as f64);
    if x1 - x0 <= 0.0 || y1 - y0 <= 0.0 {
        return Err(Error::invalid(format!("crop box {bbox:?} has zero area inside the image")));
    }
    let mapping = CropMapping {
        x0,
        y0,
        scale_x: (x1 - x0) / out_w as f64,
        scale_y: (y1 - y0) / out_h as f64,
    };
    let src = image.data();
    let mut out = vec![0.0; c * out_h * out_w];
    // Precompute the horizontal taps once per column.
    let taps_x: Vec<(usize, usize, f64)> = (0..out_w)
        .map(|u| axis_taps(mapping.to_source(u as f64, 0.0).0, w))
        .collect();
    for v in 0..out_h {
        let (ya, yb, fy) = axis_taps(mapping.to_source(0.0, v as f64).1, h);
        for ch in 0..c {
            let plane = &src[ch * h * w..(ch + 1) * h * w];
            let row = &mut out[(ch * out_h + v) * out_w..(ch * out_h + v + 1) * out_w];
            for (u, &(xa, xb, fx)) in taps_x.iter().enumerate() {
                let top = plane[ya * w + xa] * (1.0 - fx) + plane[ya * w + xb] * fx;
                let bottom = plane[yb * w + xa] * (1.0 - fx) + plane[yb * w + xb] * fx;
                row[u] = top * (1.0 - fy) + bottom * fy;
            }
        }
    }
    Ok((Tensor::new(vec![c, out_h, out_w], out)?, mapping))
}

/// Neighbouring sample indices and interpolation weight, clamped at edges.
fn axis_taps(pos: f64, len: usize) -> (usize, usize, f64) {
    let max = (len - 1) as f64;
    let p = pos.clamp(0.0, max);
    let a = p.floor();
    let b = (a + 1.0).min(max);
    (a as usize, b as usize, p - a)
}
