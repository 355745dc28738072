//! Loss arithmetic for training a dense teacher and a sparse student to
//! agree: random masking of the input cloud, moving predictions between the
//! full and masked point sets, and the squared-distance consistency terms.

use kiddo::{ImmutableKdTree, SquaredEuclidean};
use rand::seq::index;
use std::num::NonZero;

use crate::error::{Error, Result};
use crate::rng::CounterRng;

pub const DEFAULT_NEIGHBORS: usize = 3;
pub const DEFAULT_COMPLETION_WEIGHT: f64 = 50.0;
pub const DEFAULT_CONFIRMATION_WEIGHT: f64 = 100.0;

/// Row-major `N × dim` values attached to `N` anchor coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionField {
    values: Vec<f64>,
    dim: usize,
    anchors: Vec<[f64; 3]>,
}

impl PredictionField {
    pub fn new(values: Vec<f64>, dim: usize, anchors: Vec<[f64; 3]>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Precondition("prediction dimension must be positive".into()));
        }
        if values.len() != anchors.len() * dim {
            return Err(Error::LengthMismatch {
                expected: anchors.len() * dim,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("prediction values must be finite".into()));
        }
        Ok(PredictionField { values, dim, anchors })
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn anchors(&self) -> &[[f64; 3]] {
        &self.anchors
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSelection {
    /// Strictly increasing indices of the points that survive the mask.
    pub kept: Vec<usize>,
    pub beta: f64,
}

/// Drops a fraction `beta` of `n` points uniformly without replacement,
/// keeping `round((1 − β)·n)` (ties to even).
pub fn random_mask(n: usize, beta: f64, seed: u64) -> Result<MaskSelection> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Precondition(format!("mask ratio must be in [0, 1], got {beta}")));
    }
    let keep = ((1.0 - beta) * n as f64).round_ties_even() as usize;
    let mut rng = CounterRng::new(seed).stream(0);
    let mut kept = index::sample(&mut rng, n, keep.min(n)).into_vec();
    kept.sort_unstable();
    Ok(MaskSelection { kept, beta })
}

/// Rows (and anchors) of `full` at the kept indices.
pub fn subsample_prediction(full: &PredictionField, sel: &MaskSelection) -> Result<PredictionField> {
    if let Some(&bad) = sel.kept.iter().find(|&&i| i >= full.len()) {
        return Err(Error::Precondition(format!(
            "mask index {bad} out of range for {} rows",
            full.len()
        )));
    }
    let mut values = Vec::with_capacity(sel.kept.len() * full.dim);
    for &i in &sel.kept {
        values.extend_from_slice(full.row(i));
    }
    Ok(PredictionField {
        values,
        dim: full.dim,
        anchors: sel.kept.iter().map(|&i| full.anchors[i]).collect(),
    })
}

fn squared_distance(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|j| (a[j] - b[j]).powi(2)).sum()
}

/// Carries a sparse prediction onto `targets` by inverse-distance weighting
/// of the `k` nearest partial rows. A target sitting exactly on an anchor
/// copies that row.
pub fn interpolate_prediction(partial: &PredictionField, targets: &[[f64; 3]], k: usize) -> Result<PredictionField> {
    if partial.is_empty() {
        return Err(Error::Precondition("cannot interpolate from an empty field".into()));
    }
    let k = NonZero::new(k.min(partial.len()))
        .ok_or_else(|| Error::Precondition("neighbor count must be at least 1".into()))?;
    let tree: ImmutableKdTree<f64, 3> = ImmutableKdTree::new_from_slice(&partial.anchors);
    let dim = partial.dim;
    let mut values = vec![0.0; targets.len() * dim];
    let mut weights = Vec::with_capacity(k.get());
    for (t, out) in targets.iter().zip(values.chunks_exact_mut(dim)) {
        let mut found: Vec<(f64, usize)> = tree
            .nearest_n::<SquaredEuclidean>(t, k)
            .into_iter()
            .map(|nn| {
                let i = nn.item as usize;
                (squared_distance(*t, partial.anchors[i]), i)
            })
            .collect();
        found.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        if found[0].0 == 0.0 {
            out.copy_from_slice(partial.row(found[0].1));
            continue;
        }
        weights.clear();
        weights.extend(found.iter().map(|&(d2, _)| 1.0 / d2.sqrt()));
        let total: f64 = weights.iter().sum();
        for (&(_, i), w) in found.iter().zip(&weights) {
            for (o, v) in out.iter_mut().zip(partial.row(i)) {
                *o += w / total * v;
            }
        }
    }
    Ok(PredictionField {
        values,
        dim,
        anchors: targets.to_vec(),
    })
}

fn mean_squared_row_distance(a: &PredictionField, b: &PredictionField) -> Result<f64> {
    if a.dim != b.dim || a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.values.len(),
            actual: b.values.len(),
        });
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum();
    Ok(sum / a.len() as f64)
}

/// Dense teacher against the student's prediction interpolated back to all points.
pub fn completion_loss(teacher_full: &PredictionField, student_interp: &PredictionField) -> Result<f64> {
    mean_squared_row_distance(teacher_full, student_interp)
}

/// Teacher restricted to the kept points against the sparse student.
pub fn confirmation_loss(teacher_sub: &PredictionField, student_partial: &PredictionField) -> Result<f64> {
    mean_squared_row_distance(teacher_sub, student_partial)
}

pub fn total_loss(l_full: f64, l_part: f64, l_p2f: f64, l_f2p: f64, alpha1: f64, alpha2: f64) -> f64 {
    l_full + l_part + alpha1 * l_p2f + alpha2 * l_f2p
}

/// Mean softmax cross-entropy of `scores` (`N × classes`, row-major) over rows
/// whose label is not `ignore_label`.
pub fn cross_entropy(scores: &[f64], classes: usize, gt: &[u32], ignore_label: Option<u32>) -> Result<f64> {
    if classes == 0 || scores.len() != gt.len() * classes {
        return Err(Error::LengthMismatch {
            expected: gt.len() * classes,
            actual: scores.len(),
        });
    }
    let mut total = 0.0;
    let mut rows = 0usize;
    for (row, &label) in scores.chunks_exact(classes).zip(gt) {
        if Some(label) == ignore_label {
            continue;
        }
        if label as usize >= classes {
            return Err(Error::LabelOutOfRange {
                label,
                num_classes: classes,
            });
        }
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let log_sum = row.iter().map(|s| (s - max).exp()).sum::<f64>().ln() + max;
        total += log_sum - row[label as usize];
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Undefined("every row is ignored".into()));
    }
    Ok(total / rows as f64)
}
