//! Precision / recall / F1 with an 11×11 confusion matrix.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::synth::{GestureLabel, NUM_CLASSES};
use crate::{Error, Result};

/// Rows and columns: the ten gestures then `Unclassified`.
pub const MATRIX_SIZE: usize = NUM_CLASSES + 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: GestureLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of samples whose truth is this class.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    /// `confusion[truth][predicted]`
    pub confusion: Vec<Vec<usize>>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Macro averages run over the gesture classes that occur among truths or
/// predictions; `Unclassified` is reported per class but never averaged.
pub fn compute_metrics(predictions: &[GestureLabel], truths: &[GestureLabel]) -> Result<MetricsReport> {
    if predictions.len() != truths.len() {
        return Err(Error::invalid(format!(
            "{} predictions vs {} truths",
            predictions.len(),
            truths.len()
        )));
    }
    let mut confusion = vec![vec![0usize; MATRIX_SIZE]; MATRIX_SIZE];
    for (p, t) in predictions.iter().zip(truths) {
        confusion[t.index()][p.index()] += 1;
    }
    let mut per_class = Vec::with_capacity(MATRIX_SIZE);
    for c in 0..MATRIX_SIZE {
        let tp = confusion[c][c];
        let predicted: usize = (0..MATRIX_SIZE).map(|r| confusion[r][c]).sum();
        let support: usize = confusion[c].iter().sum();
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        per_class.push(ClassMetrics {
            label: GestureLabel::from_index(c).expect("index in range"),
            precision,
            recall,
            f1: harmonic(precision, recall),
            support,
        });
    }
    let active: Vec<&ClassMetrics> = per_class[..NUM_CLASSES]
        .iter()
        .enumerate()
        .filter(|(c, m)| m.support > 0 || (0..MATRIX_SIZE).any(|r| confusion[r][*c] > 0))
        .map(|(_, m)| m)
        .collect();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if active.is_empty() {
            0.0
        } else {
            active.iter().map(|m| f(m)).sum::<f64>() / active.len() as f64
        }
    };
    let correct: usize = (0..NUM_CLASSES).map(|c| confusion[c][c]).sum();
    Ok(MetricsReport {
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        accuracy: ratio(correct, truths.len()),
        per_class,
        confusion,
    })
}

impl MetricsReport {
    pub fn to_table(&self) -> String {
        let mut s = String::from("class          precision  recall     f1  support\n");
        for m in &self.per_class {
            let _ = writeln!(
                s,
                "{:<13} {:>10.4} {:>7.4} {:>6.4} {:>8}",
                m.label.name(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            );
        }
        let _ = writeln!(
            s,
            "{:<13} {:>10.4} {:>7.4} {:>6.4}",
            "macro", self.macro_precision, self.macro_recall, self.macro_f1
        );
        let _ = writeln!(s, "accuracy {:.4}", self.accuracy);
        s.push_str("confusion (rows = truth, cols = predicted):\n");
        for row in &self.confusion {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:>4}")).collect();
            let _ = writeln!(s, "{}", cells.join(""));
        }
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
