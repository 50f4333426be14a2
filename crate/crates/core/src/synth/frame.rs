//! Synthetic 99×99 fingertip frames: a skin-toned capsule ("finger") with a
//! palm blob at its base and a brightened tip, over random clutter.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::nn::Tensor;
use crate::rng::seeded;

pub const FRAME_SIZE: usize = 99;

/// Tip positions are drawn from this margin inward.
const TIP_MARGIN: f64 = 12.0;

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSample {
    /// `[3, 99, 99]`, values `k / 255`.
    pub image: Tensor,
    /// Tip in frame pixel coordinates (pixel centers at integers).
    pub tip: (f64, f64),
    pub seed: u64,
}

fn distance_to_segment(px: f64, py: f64, a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((px - a.0) * dx + (py - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (px - a.0 - t * dx).hypot(py - a.1 - t * dy)
}

/// Renders one frame. Pure in `seed`.
pub fn render_fingertip_frame(seed: u64) -> FrameSample {
    let mut rng = seeded(seed);
    let n = FRAME_SIZE;
    let mut img = vec![[0.0f64; 3]; n * n];

    // Background: a linear gradient between two random colors...
    let c0: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.05..0.6));
    let c1: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.05..0.6));
    let grad_angle: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let (gs, gc) = grad_angle.sin_cos();
    for y in 0..n {
        for x in 0..n {
            let t = (((x as f64 - 49.0) * gc + (y as f64 - 49.0) * gs) / 140.0 + 0.5).clamp(0.0, 1.0);
            img[y * n + x] = std::array::from_fn(|c| c0[c] * (1.0 - t) + c1[c] * t);
        }
    }
    // ...with random rectangles and ellipses for clutter.
    let blobs = rng.random_range(4..10);
    for _ in 0..blobs {
        let color: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..0.7));
        let (cx, cy) = (rng.random_range(0.0..n as f64), rng.random_range(0.0..n as f64));
        let (rx, ry) = (rng.random_range(3.0..20.0), rng.random_range(3.0..20.0));
        let ellipse = rng.random_bool(0.5);
        for y in 0..n {
            for x in 0..n {
                let (u, v) = ((x as f64 - cx) / rx, (y as f64 - cy) / ry);
                let inside = if ellipse { u * u + v * v <= 1.0 } else { u.abs() <= 1.0 && v.abs() <= 1.0 };
                if inside {
                    img[y * n + x] = color;
                }
            }
        }
    }

    // Finger: capsule from the tip back toward the hand.
    let tip = (
        rng.random_range(TIP_MARGIN..n as f64 - 1.0 - TIP_MARGIN),
        rng.random_range(TIP_MARGIN..n as f64 - 1.0 - TIP_MARGIN),
    );
    let direction: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let length = rng.random_range(35.0..65.0);
    let base = (tip.0 + length * direction.cos(), tip.1 + length * direction.sin());
    let radius = rng.random_range(4.0..6.5);
    let palm = rng.random_range(14.0..22.0);
    let palm_center = (
        base.0 + 0.6 * palm * direction.cos(),
        base.1 + 0.6 * palm * direction.sin(),
    );
    let skin = [
        rng.random_range(0.72..0.92),
        rng.random_range(0.52..0.7),
        rng.random_range(0.4..0.58),
    ];
    for y in 0..n {
        for x in 0..n {
            let (px, py) = (x as f64, y as f64);
            let d_finger = distance_to_segment(px, py, tip, base);
            let d_palm = (px - palm_center.0).hypot(py - palm_center.1);
            if d_finger <= radius || d_palm <= palm {
                // Mild shading toward the finger's edge.
                let shade = if d_finger <= radius { 1.0 - 0.25 * (d_finger / radius).powi(2) } else { 0.85 };
                img[y * n + x] = std::array::from_fn(|c| skin[c] * shade);
            }
        }
    }
    // Brightened tip (nail highlight).
    for y in 0..n {
        for x in 0..n {
            let d = (x as f64 - tip.0).hypot(y as f64 - tip.1);
            if d <= 3.5 {
                let w = 0.85 * (1.0 - d / 4.5);
                let px = &mut img[y * n + x];
                for v in px.iter_mut() {
                    *v = *v * (1.0 - w) + w;
                }
            }
        }
    }

    let noise = Normal::new(0.0, 0.02).expect("positive sigma");
    let mut data = vec![0.0; 3 * n * n];
    for (i, px) in img.iter().enumerate() {
        for c in 0..3 {
            let v = (px[c] + noise.sample(&mut rng)).clamp(0.0, 1.0);
            data[c * n * n + i] = (v * 255.0).round() / 255.0;
        }
    }
    FrameSample {
        image: Tensor::new(vec![3, n, n], data).expect("consistent shape"),
        tip,
        seed,
    }
}
