//! Softmax and the two training losses.

use crate::{Error, Result};

/// Max-shifted softmax. Rejects empty or non-finite scores.
pub fn softmax(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.is_empty() {
        return Err(Error::invalid("softmax of an empty score vector"));
    }
    if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
        return Err(Error::NonFinite(format!("score[{i}] = {}", scores[i])));
    }
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for p in &mut out {
        *p /= sum;
    }
    Ok(out)
}

/// Cross-entropy of a probability vector against a class index.
///
/// The returned gradient is with respect to the pre-softmax scores, i.e. the
/// fused softmax + cross-entropy derivative `probs - onehot(target)`.
pub fn cross_entropy_loss(probs: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= probs.len() {
        return Err(Error::invalid(format!(
            "target class {target} out of range for {} classes",
            probs.len()
        )));
    }
    // Clamp keeps a saturated wrong prediction finite.
    let loss = -probs[target].max(f64::MIN_POSITIVE).ln();
    let mut grad = probs.to_vec();
    grad[target] -= 1.0;
    Ok((loss, grad))
}

/// Convenience: softmax followed by [`cross_entropy_loss`].
pub fn softmax_cross_entropy(scores: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    let probs = softmax(scores)?;
    cross_entropy_loss(&probs, target)
}

/// Mean squared error and its gradient `2 (pred - truth) / N`.
pub fn mse_loss(pred: &[f64], truth: &[f64]) -> Result<(f64, Vec<f64>)> {
    if pred.len() != truth.len() {
        return Err(Error::shape(format!(
            "mse between lengths {} and {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(Error::invalid("mse of empty vectors"));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let grad = pred
        .iter()
        .zip(truth)
        .map(|(p, t)| {
            let d = p - t;
            loss += d * d;
            2.0 * d / n
        })
        .collect();
    Ok((loss / n, grad))
}
