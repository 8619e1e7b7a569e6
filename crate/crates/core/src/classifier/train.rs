use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::model::SoftmaxModel;
use super::pool::PooledVector;
use super::schedule::{sgdr_lr, TrainConfig};
use crate::scores::ScoreMatrix;
use crate::{Error, Result};

/// One pooled utterance with its id and label.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub id: String,
    pub input: PooledVector,
    pub label: String,
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub model: SoftmaxModel,
    /// Training-set loss of the untrained model.
    pub initial_loss: f64,
    /// Training-set loss after each epoch.
    pub epoch_losses: Vec<f64>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    /// Validation accuracy in `[0, 1]` of the kept model, when a validation set was given.
    pub validation_accuracy: Option<f64>,
}

fn class_index(labels: &[String], label: &str) -> Option<usize> {
    labels.binary_search_by(|l| l.as_str().cmp(label)).ok()
}

/// Fraction of examples whose argmax class (lowest index on ties) matches the label.
pub fn accuracy_of(model: &SoftmaxModel, examples: &[Example]) -> Result<f64> {
    if examples.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut correct = 0usize;
    for e in examples {
        let p = model.forward(e.input.as_slice())?;
        let pred = crate::fusion::argmax(&p);
        if model.class_labels[pred] == e.label {
            correct += 1;
        }
    }
    Ok(correct as f64 / examples.len() as f64)
}

fn fit_standardizer(model: &mut SoftmaxModel, data: &[Example]) {
    let d = model.dims();
    let n = data.len() as f64;
    for j in 0..d {
        let mean = data.iter().map(|e| e.input.0[j]).sum::<f64>() / n;
        let var = data.iter().map(|e| (e.input.0[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        model.input_shift[j] = mean;
        model.input_scale[j] = if sd > 1e-12 { 1.0 / sd } else { 1.0 };
    }
}

/// Minimize mean cross-entropy with momentum SGD (`v <- mu v - lr g`, `theta <- theta + v`).
///
/// Classes are the sorted distinct training labels. Inputs are standardized with training
/// statistics stored in the model. The shuffle order is fixed by `cfg.seed`. With a
/// validation set the parameters of the best-scoring epoch (earliest on ties) are returned.
pub fn train(data: &[Example], validation: Option<&[Example]>, cfg: &TrainConfig) -> Result<TrainReport> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("training set"));
    }
    let dims = data[0].input.len();
    if let Some(bad) = data.iter().find(|e| e.input.len() != dims) {
        return Err(Error::Dimension {
            expected: dims,
            found: bad.input.len(),
        });
    }
    let mut labels: Vec<String> = data.iter().map(|e| e.label.clone()).collect();
    labels.sort();
    labels.dedup();
    if labels.len() < 2 {
        return Err(Error::SingleClass(labels.len()));
    }

    let mut model = SoftmaxModel::zeros(labels, dims);
    fit_standardizer(&mut model, data);
    let targets: Vec<usize> = data
        .iter()
        .map(|e| class_index(&model.class_labels, &e.label).expect("label taken from data"))
        .collect();
    let full: Vec<(&[f64], usize)> = data.iter().map(|e| e.input.as_slice()).zip(targets.iter().copied()).collect();

    let initial_loss = model.loss(&full)?;
    let mut vel_w = vec![0.0; model.weights.len()];
    let mut vel_b = vec![0.0; model.bias.len()];
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut best: Option<(f64, usize, SoftmaxModel)> = None;

    for epoch in 0..cfg.epochs {
        let lr = sgdr_lr(epoch, cfg);
        order.shuffle(&mut rng);
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], usize)> = chunk.iter().map(|&i| full[i]).collect();
            let (_, g) = model.loss_and_gradient(&batch)?;
            for ((w, v), gw) in model.weights.iter_mut().zip(&mut vel_w).zip(&g.weights) {
                *v = cfg.momentum * *v - lr * gw;
                *w += *v;
            }
            for ((b, v), gb) in model.bias.iter_mut().zip(&mut vel_b).zip(&g.bias) {
                *v = cfg.momentum * *v - lr * gb;
                *b += *v;
            }
        }
        let loss = model.loss(&full)?;
        if !loss.is_finite() {
            return Err(Error::NanLoss(epoch));
        }
        epoch_losses.push(loss);
        if let Some(val) = validation.filter(|v| !v.is_empty()) {
            let acc = accuracy_of(&model, val)?;
            if best.as_ref().is_none_or(|(b, _, _)| acc > *b) {
                best = Some((acc, epoch, model.clone()));
            }
        }
    }

    Ok(match best {
        Some((acc, epoch, m)) => TrainReport {
            model: m,
            initial_loss,
            epoch_losses,
            best_epoch: epoch,
            validation_accuracy: Some(acc),
        },
        None => TrainReport {
            model,
            initial_loss,
            best_epoch: cfg.epochs - 1,
            epoch_losses,
            validation_accuracy: None,
        },
    })
}

/// Posterior rows for every example, sorted by utterance id.
pub fn score_dataset(model: &SoftmaxModel, examples: &[Example]) -> Result<ScoreMatrix> {
    if examples.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let mut sorted: Vec<&Example> = examples.iter().collect();
    sorted.sort_by(|a, b| a.id.cmp(&b.id));
    let mut probs = Vec::with_capacity(sorted.len() * model.n_classes());
    for e in &sorted {
        probs.extend(model.forward(e.input.as_slice())?);
    }
    ScoreMatrix::new(
        sorted.iter().map(|e| e.id.clone()).collect(),
        model.class_labels.clone(),
        probs,
    )
}
