//! Central-difference verification of analytic gradients.

use crate::nn::model::Parameterized;
use crate::nn::tensor::Tensor;
use crate::{Error, Result};

/// Finite-difference step.
pub const STEP: f64 = 1e-4;

/// Gradients smaller than this are compared absolutely: the relative error
/// is `|analytic - numeric| / max(|numeric|, FLOOR)`. Central differences
/// at `STEP` carry O(1e-9) truncation error, so a pure ratio would be noise
/// for near-zero entries.
pub const FLOOR: f64 = 1e-3;

/// Worst agreement between an analytic gradient and central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// `(parameter name, flat index)` of the worst entry.
    pub worst: Option<(String, usize)>,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error <= tolerance
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / numeric.abs().max(FLOOR)
}

/// Compares `analytic` (one tensor per parameter, [`Parameterized::params`]
/// order) against central differences of `loss`, perturbing every parameter
/// entry of `model` in turn. The model is restored exactly afterwards.
pub fn gradient_check<M, F>(model: &mut M, analytic: &[Tensor], loss: F) -> Result<GradCheckReport>
where
    M: Parameterized,
    F: FnMut(&M) -> Result<f64>,
{
    let entries: Vec<(usize, usize)> = analytic
        .iter()
        .enumerate()
        .flat_map(|(p, g)| (0..g.len()).map(move |i| (p, i)))
        .collect();
    gradient_check_entries(model, analytic, loss, &entries)
}

/// Like [`gradient_check`] but only for the listed `(tensor, flat index)`
/// entries.
pub fn gradient_check_entries<M, F>(
    model: &mut M,
    analytic: &[Tensor],
    mut loss: F,
    entries: &[(usize, usize)],
) -> Result<GradCheckReport>
where
    M: Parameterized,
    F: FnMut(&M) -> Result<f64>,
{
    let shapes: Vec<Vec<usize>> = model.params().iter().map(|p| p.shape().to_vec()).collect();
    if shapes.len() != analytic.len() {
        return Err(Error::shape(format!(
            "{} parameter tensors but {} gradients",
            shapes.len(),
            analytic.len()
        )));
    }
    for (shape, g) in shapes.iter().zip(analytic) {
        g.expect_shape(shape)?;
    }
    let base = loss(model)?;
    if !base.is_finite() {
        return Err(Error::NonFinite(format!("loss = {base}")));
    }
    let names = model.param_names();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: None,
        checked: 0,
    };
    for &(p, i) in entries {
        let grad = analytic.get(p).ok_or_else(|| Error::OutOfBounds(format!("tensor {p}")))?;
        if i >= grad.len() {
            return Err(Error::OutOfBounds(format!("entry {i} of {}", names[p])));
        }
        let original = model.params()[p].data()[i];
        model.params_mut()[p].data_mut()[i] = original + STEP;
        let plus = loss(model);
        model.params_mut()[p].data_mut()[i] = original - STEP;
        let minus = loss(model);
        model.params_mut()[p].data_mut()[i] = original;
        let (plus, minus) = (plus?, minus?);
        if !plus.is_finite() || !minus.is_finite() {
            return Err(Error::NonFinite(format!("perturbed loss at {}[{i}]", names[p])));
        }
        let numeric = (plus - minus) / (2.0 * STEP);
        let err = relative_error(grad.data()[i], numeric);
        report.checked += 1;
        if err > report.max_rel_error || report.worst.is_none() {
            report.max_rel_error = report.max_rel_error.max(err);
            report.worst = Some((names[p].clone(), i));
        }
    }
    Ok(report)
}
