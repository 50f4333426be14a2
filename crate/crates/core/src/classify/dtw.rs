//! Dynamic time warping and the 1-nearest-neighbour baseline.

use crate::classify::preprocess::{normalize_trajectory, resample_trajectory, RESAMPLE_LENGTH};
use crate::synth::{GestureLabel, Trajectory};
use crate::{Error, Result};

fn local_cost(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Minimum total Euclidean cost over monotone alignments using the steps
/// `(1,0)`, `(0,1)` and `(1,1)`.
pub fn dtw_distance(a: &[[f64; 2]], b: &[[f64; 2]]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("dtw needs non-empty sequences"));
    }
    let m = b.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![0.0; m];
    for (i, &pa) in a.iter().enumerate() {
        for j in 0..m {
            let best = match (i, j) {
                (0, 0) => 0.0,
                (0, _) => cur[j - 1],
                (_, 0) => prev[0],
                _ => prev[j].min(cur[j - 1]).min(prev[j - 1]),
            };
            cur[j] = best + local_cost(pa, b[j]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let d = prev[m - 1];
    if !d.is_finite() {
        return Err(Error::NonFinite("dtw distance".into()));
    }
    Ok(d)
}

/// 1-NN over resampled, normalized training trajectories.
#[derive(Debug, Clone, PartialEq)]
pub struct DtwClassifier {
    pub templates: Vec<(Vec<[f64; 2]>, GestureLabel)>,
}

pub fn dtw_prepare(traj: &Trajectory) -> Result<Vec<[f64; 2]>> {
    Ok(resample_trajectory(&normalize_trajectory(traj)?, RESAMPLE_LENGTH)?.points)
}

impl DtwClassifier {
    pub fn fit(train: &[Trajectory]) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::invalid("training set is empty"));
        }
        let templates = train
            .iter()
            .map(|t| {
                let label = t
                    .label
                    .filter(|l| l.is_gesture())
                    .ok_or_else(|| Error::invalid("training trajectory without a gesture label"))?;
                Ok((dtw_prepare(t)?, label))
            })
            .collect::<Result<_>>()?;
        Ok(Self { templates })
    }

    /// Nearest template's label and the per-class minimum distances
    /// (infinite for classes without templates). Ties go to the smallest
    /// class index.
    pub fn nearest(&self, query: &[[f64; 2]]) -> Result<(GestureLabel, Vec<f64>)> {
        let mut per_class = vec![f64::INFINITY; GestureLabel::GESTURES.len()];
        for (template, label) in &self.templates {
            let d = dtw_distance(query, template)?;
            let slot = &mut per_class[label.index()];
            if d < *slot {
                *slot = d;
            }
        }
        let mut best = 0;
        for (i, &d) in per_class.iter().enumerate() {
            if d < per_class[best] {
                best = i;
            }
        }
        Ok((GestureLabel::GESTURES[best], per_class))
    }
}
