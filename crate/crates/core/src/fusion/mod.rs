//! Linear fusion of posterior scores and the evaluation built on top of it.

mod confusion;
mod sweep;

pub use confusion::{confusion, confusion_diff, CellMarker, ConfusionMatrix, DiffCell, DiffReport};
pub use sweep::{subsets_up_to, sweep_combinations, AccuracyTable, SweepRow};

use std::collections::HashMap;

use crate::scores::ScoreMatrix;
use crate::{Error, Result};

/// Allowed deviation of the weight sum from one.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

/// Utterance id → true label.
pub type Truth = HashMap<String, String>;

/// Score sources and their fusion weights.
#[derive(Debug, Clone)]
pub struct FusionSpec<'a> {
    sources: Vec<&'a ScoreMatrix>,
    weights: Vec<f64>,
}

impl<'a> FusionSpec<'a> {
    pub fn new(sources: Vec<&'a ScoreMatrix>, weights: Vec<f64>) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::Fusion("need at least one source".into()));
        }
        if sources.len() != weights.len() {
            return Err(Error::Fusion(format!(
                "{} sources but {} weights",
                sources.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Fusion("weights must be finite and nonnegative".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::Fusion(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self { sources, weights })
    }

    /// Every source weighted `1/n`.
    pub fn equal(sources: Vec<&'a ScoreMatrix>) -> Result<Self> {
        let n = sources.len();
        Self::new(sources, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn sources(&self) -> &[&'a ScoreMatrix] {
        &self.sources
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Row and column index maps taking `other` into `reference` order.
fn align(reference: &ScoreMatrix, other: &ScoreMatrix) -> Result<(Vec<usize>, Vec<usize>)> {
    if other.n_classes() != reference.n_classes() {
        return Err(Error::Fusion(format!(
            "class sets differ: {} vs {} classes",
            reference.n_classes(),
            other.n_classes()
        )));
    }
    let class_pos: HashMap<&str, usize> = other
        .class_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect();
    let cols = reference
        .class_labels
        .iter()
        .map(|l| {
            class_pos
                .get(l.as_str())
                .copied()
                .ok_or_else(|| Error::Fusion(format!("class {l} missing from a source")))
        })
        .collect::<Result<Vec<_>>>()?;
    if other.n_utts() != reference.n_utts() {
        return Err(Error::Fusion(format!(
            "utterance sets differ: {} vs {} rows",
            reference.n_utts(),
            other.n_utts()
        )));
    }
    let idx = other.index_of();
    let rows = reference
        .utt_ids
        .iter()
        .map(|id| {
            idx.get(id.as_str())
                .copied()
                .ok_or_else(|| Error::Fusion(format!("utterance {id} missing from a source")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((rows, cols))
}

/// Weighted sum of posterior rows, aligned by utterance id and class label to the first
/// source.
///
/// Evaluated as `p_1 + sum_{i>1} w_i (p_i - p_1)`, which equals `sum_i w_i p_i` when the
/// weights sum to one and returns `p_1` bit-for-bit when every source is identical.
pub fn fuse(spec: &FusionSpec<'_>) -> Result<ScoreMatrix> {
    let reference = spec.sources[0];
    let k = reference.n_classes();
    let mut probs = reference.probs.clone();
    for (src, &w) in spec.sources.iter().zip(&spec.weights).skip(1) {
        let (rows, cols) = align(reference, src)?;
        for (r, &sr) in rows.iter().enumerate() {
            let theirs = src.row(sr);
            let base = reference.row(r);
            for c in 0..k {
                probs[r * k + c] += w * (theirs[cols[c]] - base[c]);
            }
        }
    }
    for p in &mut probs {
        *p = p.max(0.0);
    }
    ScoreMatrix::new(reference.utt_ids.clone(), reference.class_labels.clone(), probs)
}

/// Index of the largest entry; the lowest index wins ties.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Predicted class index per utterance.
pub fn predict(m: &ScoreMatrix) -> Vec<usize> {
    m.rows().map(argmax).collect()
}

fn truth_for<'t>(truth: &'t Truth, id: &str) -> Result<&'t str> {
    truth
        .get(id)
        .map(String::as_str)
        .ok_or_else(|| Error::MissingTruth(id.to_string()))
}

/// Percentage of utterances whose predicted label equals the truth.
pub fn accuracy(m: &ScoreMatrix, truth: &Truth) -> Result<f64> {
    if m.n_utts() == 0 {
        return Err(Error::Empty("score matrix"));
    }
    let mut correct = 0usize;
    for (id, pred) in m.utt_ids.iter().zip(predict(m)) {
        if truth_for(truth, id)? == m.class_labels[pred] {
            correct += 1;
        }
    }
    Ok(100.0 * correct as f64 / m.n_utts() as f64)
}

/// Two-decimal rendering used in reports.
pub fn format_accuracy(acc: f64) -> String {
    format!("{acc:.2}")
}
