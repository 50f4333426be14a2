//! Success-rate curve and mean tip error.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::regressor::model::FingertipRegressor;
use crate::synth::FrameSample;
use crate::{Error, Result};

pub const MAX_THRESHOLD_PX: u32 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuccessCurve {
    /// Integer pixel thresholds `0..=30`.
    pub thresholds: Vec<u32>,
    /// Fraction of samples with error ≤ the matching threshold.
    pub success_rate: Vec<f64>,
    /// Mean Euclidean tip error in pixels of the 99×99 frame.
    pub mean_error_px: f64,
    pub errors_px: Vec<f64>,
}

impl SuccessCurve {
    pub fn from_errors(errors: Vec<f64>) -> Result<Self> {
        if errors.is_empty() {
            return Err(Error::invalid("test set is empty"));
        }
        if errors.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::NonFinite("tip errors".into()));
        }
        let n = errors.len() as f64;
        let thresholds: Vec<u32> = (0..=MAX_THRESHOLD_PX).collect();
        let success_rate = thresholds
            .iter()
            .map(|&t| errors.iter().filter(|&&e| e <= t as f64).count() as f64 / n)
            .collect();
        Ok(Self {
            thresholds,
            success_rate,
            mean_error_px: errors.iter().sum::<f64>() / n,
            errors_px: errors,
        })
    }

    pub fn rate_at(&self, threshold: u32) -> Option<f64> {
        self.thresholds
            .iter()
            .position(|&t| t == threshold)
            .map(|i| self.success_rate[i])
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("mean error: {:.3} px over {} samples\n", self.mean_error_px, self.errors_px.len());
        s.push_str("threshold_px  success_rate\n");
        for (t, r) in self.thresholds.iter().zip(&self.success_rate) {
            let _ = writeln!(s, "{t:>12}  {r:.4}");
        }
        s
    }

    pub fn to_svg(&self) -> String {
        let (w, h, m) = (480.0, 320.0, 40.0);
        let max_t = MAX_THRESHOLD_PX as f64;
        let px = |t: f64| m + t / max_t * (w - 2.0 * m);
        let py = |r: f64| h - m - r * (h - 2.0 * m);
        let points: Vec<String> = self
            .thresholds
            .iter()
            .zip(&self.success_rate)
            .map(|(&t, &r)| format!("{:.1},{:.1}", px(t as f64), py(r)))
            .collect();
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
        );
        let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
        let _ = writeln!(
            s,
            "<path d=\"M{m},{} L{},{} M{m},{m} L{m},{}\" stroke=\"black\" fill=\"none\"/>",
            h - m,
            w - m,
            h - m,
            h - m
        );
        for t in (0..=MAX_THRESHOLD_PX).step_by(5) {
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{}\" font-size=\"10\" text-anchor=\"middle\">{t}</text>",
                px(t as f64),
                h - m + 14.0
            );
        }
        for r in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{:.1}\" font-size=\"10\" text-anchor=\"end\">{r:.2}</text>",
                m - 4.0,
                py(r) + 3.0
            );
        }
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">error threshold (px)</text>",
            w / 2.0,
            h - 6.0
        );
        let _ = writeln!(
            s,
            "<polyline points=\"{}\" stroke=\"#1f77b4\" stroke-width=\"2\" fill=\"none\"/>",
            points.join(" ")
        );
        s.push_str("</svg>\n");
        s
    }
}

pub fn tip_errors(model: &FingertipRegressor, test: &[FrameSample]) -> Result<Vec<f64>> {
    test.iter()
        .map(|s| {
            let (x, y) = model.predict(&s.image)?;
            Ok((x - s.tip.0).hypot(y - s.tip.1))
        })
        .collect()
}

pub fn eval_success_curve(model: &FingertipRegressor, test: &[FrameSample]) -> Result<SuccessCurve> {
    if test.is_empty() {
        return Err(Error::invalid("test set is empty"));
    }
    SuccessCurve::from_errors(tip_errors(model, test)?)
}
